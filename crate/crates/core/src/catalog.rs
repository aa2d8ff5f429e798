//! Small cubic cages shipped as exact adjacency data.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cage {
    Petersen,
    Heawood,
    #[serde(rename = "mcgee")]
    McGee,
    TutteCoxeter,
    #[serde(rename = "balaban-10")]
    Balaban10,
}

const BALABAN_LCF: [i64; 70] = [
    -9, -25, -19, 29, 13, 35, -13, -29, 19, 25, 9, -29, 29, 17, 33, 21, 9, -13, -31, -9, 25, 17, 9, -31, 27, -9, 17,
    -19, -29, 27, -17, -9, -29, 33, -25, 25, -21, 17, -17, 29, 35, -29, 17, -17, 21, -25, 25, -33, 29, 9, 17, -27, 29,
    19, -17, 9, -27, 31, -9, -17, -25, 9, 31, 13, -9, -21, -33, -17, -29, 29,
];

impl Cage {
    pub const ALL: [Cage; 5] = [Cage::Petersen, Cage::Heawood, Cage::McGee, Cage::TutteCoxeter, Cage::Balaban10];

    pub fn name(self) -> &'static str {
        match self {
            Cage::Petersen => "petersen",
            Cage::Heawood => "heawood",
            Cage::McGee => "mcgee",
            Cage::TutteCoxeter => "tutte-coxeter",
            Cage::Balaban10 => "balaban-10",
        }
    }

    pub fn vertex_count(self) -> usize {
        match self {
            Cage::Petersen => 10,
            Cage::Heawood => 14,
            Cage::McGee => 24,
            Cage::TutteCoxeter => 30,
            Cage::Balaban10 => 70,
        }
    }

    pub fn girth(self) -> u64 {
        match self {
            Cage::Petersen => 5,
            Cage::Heawood => 6,
            Cage::McGee => 7,
            Cage::TutteCoxeter => 8,
            Cage::Balaban10 => 10,
        }
    }

    pub fn graph(self) -> WeightedGraph {
        match self {
            Cage::Petersen => {
                let outer = (0..5).map(|i| (i, (i + 1) % 5));
                let spokes = (0..5).map(|i| (i, i + 5));
                let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
                WeightedGraph::unit(10, outer.chain(spokes).chain(inner).collect::<Vec<_>>())
                    .expect("petersen data is valid")
            }
            Cage::Heawood => lcf(14, &[5, -5]),
            Cage::McGee => lcf(24, &[12, 7, -7]),
            Cage::TutteCoxeter => lcf(30, &[-13, -9, 7, -7, 9, 13]),
            Cage::Balaban10 => lcf(70, &BALABAN_LCF),
        }
    }

    /// The catalog entry with exactly `n` vertices and girth at least `g`.
    pub fn lookup(n: usize, g: u64) -> Option<Cage> {
        Cage::ALL.into_iter().find(|c| c.vertex_count() == n && c.girth() >= g)
    }
}

/// Hamiltonian cubic graph from LCF notation: a Hamilton cycle on `n`
/// vertices plus chords `i -- i + jumps[i mod len]`.
fn lcf(n: usize, jumps: &[i64]) -> WeightedGraph {
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for i in 0..n {
        let j = (i as i64 + jumps[i % jumps.len()]).rem_euclid(n as i64) as usize;
        if i < j {
            edges.push((i, j));
        }
    }
    WeightedGraph::unit(n, edges).expect("LCF data is valid")
}

impl fmt::Display for Cage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Cage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        match key.as_str() {
            "petersen" => Ok(Cage::Petersen),
            "heawood" => Ok(Cage::Heawood),
            "mcgee" => Ok(Cage::McGee),
            "tutte-coxeter" | "tutte" | "tutte-8-cage" => Ok(Cage::TutteCoxeter),
            "balaban-10" | "balaban" | "balaban-10-cage" => Ok(Cage::Balaban10),
            _ => Err(Error::Argument(format!(
                "unknown cage {s:?} (expected petersen, heawood, mcgee, tutte-coxeter or balaban-10)"
            ))),
        }
    }
}
