use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Injective logical → physical map, with the inverse kept alongside.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayoutRepr", into = "LayoutRepr")]
pub struct Layout {
    l2p: Vec<u32>,
    p2l: Vec<Option<u32>>,
}

#[derive(Serialize, Deserialize)]
struct LayoutRepr {
    num_physical: u32,
    logical_to_physical: Vec<u32>,
}

impl TryFrom<LayoutRepr> for Layout {
    type Error = Error;

    fn try_from(r: LayoutRepr) -> Result<Self> {
        Layout::new(r.logical_to_physical, r.num_physical)
    }
}

impl From<Layout> for LayoutRepr {
    fn from(l: Layout) -> Self {
        LayoutRepr { num_physical: l.p2l.len() as u32, logical_to_physical: l.l2p }
    }
}

impl Layout {
    pub fn new(logical_to_physical: Vec<u32>, num_physical: u32) -> Result<Self> {
        let mut p2l = vec![None; num_physical as usize];
        for (l, &p) in logical_to_physical.iter().enumerate() {
            let slot = p2l.get_mut(p as usize).ok_or_else(|| {
                Error::InvalidInput(format!("logical {l} mapped to missing physical {p}"))
            })?;
            if slot.is_some() {
                return Err(Error::InvalidInput(format!("physical {p} assigned twice")));
            }
            *slot = Some(l as u32);
        }
        Ok(Layout { l2p: logical_to_physical, p2l })
    }

    pub fn trivial(num_logical: u32, num_physical: u32) -> Result<Self> {
        Self::new((0..num_logical).collect(), num_physical)
    }

    pub fn num_logical(&self) -> usize {
        self.l2p.len()
    }

    pub fn num_physical(&self) -> usize {
        self.p2l.len()
    }

    pub fn physical(&self, logical: u32) -> u32 {
        self.l2p[logical as usize]
    }

    pub fn logical_at(&self, physical: u32) -> Option<u32> {
        self.p2l[physical as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.l2p
    }

    /// Exchanges whatever sits on two physical qubits.
    pub fn swap_physical(&mut self, a: u32, b: u32) {
        let (la, lb) = (self.p2l[a as usize], self.p2l[b as usize]);
        self.p2l[a as usize] = lb;
        self.p2l[b as usize] = la;
        if let Some(l) = la {
            self.l2p[l as usize] = b;
        }
        if let Some(l) = lb {
            self.l2p[l as usize] = a;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    #[serde(alias = "strawman")]
    Baseline,
    Seqc,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Baseline => "baseline",
            Pipeline::Seqc => "seqc",
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" | "strawman" => Ok(Pipeline::Baseline),
            "seqc" => Ok(Pipeline::Seqc),
            other => Err(Error::InvalidInput(format!("unknown pipeline '{other}'"))),
        }
    }
}

/// A physical circuit together with where each logical qubit starts and ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    pub backend_id: String,
    pub pipeline: Pipeline,
    pub seed: u64,
}

impl CompiledCircuit {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
