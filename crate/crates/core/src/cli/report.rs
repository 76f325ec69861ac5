//! Machine-readable reports.
//!
//! JSON field order follows the struct declarations and never changes within a
//! schema version. Wall-clock timing is kept out of the JSON so that identical
//! inputs give byte-identical reports; the text form shows it on request.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub n: usize,
    /// Right-hand side of `u_t = ...` in source syntax.
    pub equation: Option<String>,
    /// `"strict"`, `"weak"` or `"not"`.
    pub parabolicity: Option<String>,
    pub ma: Option<MaSection>,
    pub laws: Vec<LawEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<DimsSection>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub elapsed: Option<Duration>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaSection {
    pub minor_affine: bool,
    pub residue_vanishes: Option<bool>,
    pub n1_affine: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawEntry {
    pub density: String,
    /// One component per spatial direction; `None` if no flux was found.
    pub flux: Option<Vec<String>>,
    pub characteristic: String,
    pub order: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimsSection {
    pub r: usize,
    pub tableau_dim: u64,
    pub system_dim: u64,
    pub deprolongation_dim: u64,
}

impl Report {
    pub fn new(n: usize) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            n,
            ..Report::default()
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self, show_timing: bool) -> String {
        let mut s = String::new();
        if let Some(eq) = &self.equation {
            let _ = writeln!(s, "equation      u_t = {eq}  (n = {})", self.n);
        }
        if let Some(p) = &self.parabolicity {
            let _ = writeln!(s, "parabolicity  {p}");
        }
        if let Some(ma) = &self.ma {
            let _ = writeln!(s, "minor affine  {}", ma.minor_affine);
            if let Some(v) = ma.n1_affine {
                let _ = writeln!(s, "u_xx affine   {v}");
            }
            match ma.residue_vanishes {
                Some(v) => {
                    let _ = writeln!(s, "residue zero  {v}");
                }
                None if self.n >= 2 => {
                    let _ = writeln!(s, "residue zero  unknown (singular symbol)");
                }
                None => {}
            }
        }
        if let Some(d) = &self.dims {
            let _ = writeln!(s, "tableau dimension (r = {})  {}", d.r, d.tableau_dim);
            let _ = writeln!(s, "parabolic system dimension  {}", d.system_dim);
            let _ = writeln!(s, "deprolongation dimension    {}", d.deprolongation_dim);
        }
        if self.equation.is_some() && self.dims.is_none() && (self.verified.is_some() || !self.laws.is_empty()) {
            let _ = writeln!(s, "laws          {}", self.laws.len());
        }
        for (k, law) in self.laws.iter().enumerate() {
            let _ = writeln!(
                s,
                "[{}] characteristic  {}  (order {})",
                k + 1,
                law.characteristic,
                law.order
            );
            let _ = writeln!(s, "    density         {}", law.density);
            match &law.flux {
                Some(flux) => {
                    for (i, x) in flux.iter().enumerate() {
                        let _ = writeln!(s, "    flux {}          {x}", i + 1);
                    }
                }
                None => {
                    let _ = writeln!(s, "    flux            not found");
                }
            }
        }
        if let Some(v) = self.verified {
            let _ = writeln!(s, "verified      {v}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        if let (true, Some(t)) = (show_timing, self.elapsed) {
            let _ = writeln!(s, "elapsed       {:.3} s", t.as_secs_f64());
        }
        s
    }
}
