//! Deterministic benchmark generators: GHZ, bit/phase repetition codes,
//! a hardware-efficient VQE ansatz and first-order Trotterized TFIM.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub const DEFAULT_CODE_ROUNDS: u32 = 2;
pub const DEFAULT_VQE_LAYERS: u32 = 2;
pub const DEFAULT_TFIM_STEPS: u32 = 1;
pub const TFIM_ZZ_ANGLE: f64 = -1.0;
pub const TFIM_X_ANGLE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ghz,
    BitCode,
    PhaseCode,
    Vqe,
    #[serde(alias = "hamiltoniansim")]
    Tfim,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Ghz, Family::BitCode, Family::PhaseCode, Family::Vqe, Family::Tfim];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ghz => "ghz",
            Family::BitCode => "bitcode",
            Family::PhaseCode => "phasecode",
            Family::Vqe => "vqe",
            Family::Tfim => "tfim",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "ghz" => Ok(Family::Ghz),
            "bitcode" => Ok(Family::BitCode),
            "phasecode" => Ok(Family::PhaseCode),
            "vqe" => Ok(Family::Vqe),
            "tfim" | "hamiltoniansim" | "hamiltoniansimulation" => Ok(Family::Tfim),
            other => Err(Error::InvalidInput(format!("unknown benchmark family '{other}'"))),
        }
    }
}

/// Everything needed to regenerate a benchmark circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub family: Family,
    pub n: u32,
    #[serde(default)]
    pub seed: u64,
    /// Code rounds, ansatz layers or Trotter steps; `None` picks the default.
    #[serde(default)]
    pub repetitions: Option<u32>,
}

impl BenchSpec {
    pub fn new(family: Family, n: u32, seed: u64) -> Self {
        BenchSpec { family, n, seed, repetitions: None }
    }

    pub fn repetitions(&self) -> u32 {
        self.repetitions.unwrap_or(match self.family {
            Family::Ghz => 0,
            Family::BitCode | Family::PhaseCode => DEFAULT_CODE_ROUNDS,
            Family::Vqe => DEFAULT_VQE_LAYERS,
            Family::Tfim => DEFAULT_TFIM_STEPS,
        })
    }

    pub fn generate(&self) -> Result<Circuit> {
        let r = self.repetitions();
        match self.family {
            Family::Ghz => ghz(self.n),
            Family::BitCode => bit_code(self.n, r),
            Family::PhaseCode => phase_code(self.n, r),
            Family::Vqe => vqe(self.n, self.seed, r),
            Family::Tfim => tfim_sim(self.n, r),
        }
    }
}

pub fn ghz(n: u32) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidInput("GHZ needs at least one qubit".into()));
    }
    let mut c = Circuit::new(format!("ghz_{n}"), n);
    c.push(Gate::h(0));
    for i in 0..n - 1 {
        c.push(Gate::cx(i, i + 1));
    }
    Ok(c)
}

/// Number of data qubits in an `n`-qubit repetition code.
pub fn code_data_qubits(n: u32) -> u32 {
    (n + 1) / 2
}

#[derive(Clone, Copy, PartialEq)]
enum CodeBasis {
    Bit,
    Phase,
}

fn repetition_code(n: u32, rounds: u32, basis: CodeBasis) -> Result<Circuit> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("repetition codes need n ≥ 3, got {n}")));
    }
    let k = code_data_qubits(n);
    let data: Vec<u32> = (0..k).map(|j| 2 * j).collect();
    let ancillas: Vec<u32> = (0..n - k).map(|j| 2 * j + 1).collect();
    let name = match basis {
        CodeBasis::Bit => format!("bitcode_{n}"),
        CodeBasis::Phase => format!("phasecode_{n}"),
    };
    let mut c = Circuit::new(name, n);

    // |1010…⟩ over the data register.
    for (j, &d) in data.iter().enumerate() {
        if j % 2 == 0 {
            c.push(Gate::x(d));
        }
    }
    if basis == CodeBasis::Phase {
        for &d in &data {
            c.push(Gate::h(d));
        }
    }

    for _ in 0..rounds {
        for &a in &ancillas {
            if basis == CodeBasis::Phase {
                c.push(Gate::h(a));
            }
            c.push(Gate::cx(a - 1, a));
            if a + 1 < n {
                c.push(Gate::cx(a + 1, a));
            }
            if basis == CodeBasis::Phase {
                c.push(Gate::h(a));
            }
        }
        for &a in &ancillas {
            c.push(Gate::measure(a));
            c.push(Gate::reset(a));
        }
        for q in 0..n {
            c.push(Gate::barrier(q));
        }
    }

    for &d in &data {
        if basis == CodeBasis::Phase {
            c.push(Gate::h(d));
        }
        c.push(Gate::measure(d));
    }
    Ok(c)
}

pub fn bit_code(n: u32, rounds: u32) -> Result<Circuit> {
    repetition_code(n, rounds, CodeBasis::Bit)
}

pub fn phase_code(n: u32, rounds: u32) -> Result<Circuit> {
    repetition_code(n, rounds, CodeBasis::Phase)
}

/// Ry rotation layers interleaved with CX ladders. Angle for qubit `q` in
/// rotation layer `l` is draw number `q·(layers+1) + l` of a SplitMix64
/// stream seeded with `seed`, scaled to `[0, 2π)`.
pub fn vqe(n: u32, seed: u64, layers: u32) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("VQE ansatz needs n ≥ 2, got {n}")));
    }
    let per_qubit = layers as usize + 1;
    let mut sm = SplitMix64::new(seed);
    let angles: Vec<f64> = (0..n as usize * per_qubit).map(|_| sm.next_f64() * TAU).collect();
    let angle = |q: u32, l: u32| angles[q as usize * per_qubit + l as usize];

    let mut c = Circuit::new(format!("vqe_{n}_s{seed}"), n);
    for l in 0..=layers {
        for q in 0..n {
            c.push(Gate::ry(angle(q, l), q));
        }
        if l < layers {
            for q in 0..n - 1 {
                c.push(Gate::cx(q, q + 1));
            }
        }
    }
    Ok(c)
}

pub fn tfim_sim(n: u32, steps: u32) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("TFIM chain needs n ≥ 2, got {n}")));
    }
    let mut c = Circuit::new(format!("tfim_{n}"), n);
    for _ in 0..steps {
        for i in 0..n - 1 {
            c.push(Gate::cx(i, i + 1));
            c.push(Gate::rz(TFIM_ZZ_ANGLE, i + 1));
            c.push(Gate::cx(i, i + 1));
        }
        for q in 0..n {
            c.push(Gate::h(q));
            c.push(Gate::rz(TFIM_X_ANGLE, q));
            c.push(Gate::h(q));
        }
    }
    Ok(c)
}
