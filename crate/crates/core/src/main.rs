fn main() {
    std::process::exit(spr_lab::cli::run(std::env::args_os()));
}
