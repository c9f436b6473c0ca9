//! Preset model scenarios: the worked two-community and rank-1 examples
//! and the configurations used by the simulation experiments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{MembershipSpec, MmsbmParams};
use crate::theory::{theory_report_for_params, TheoryReport};

/// Numeric knobs a preset accepts; unset knobs take the scenario defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PresetKnobs {
    pub n: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub eps: Option<f64>,
    pub alpha: Option<f64>,
}

impl PresetKnobs {
    /// Set a knob by name (grid sweeps address knobs this way).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "n" => {
                if value.fract() != 0.0 || value < 2.0 {
                    return Err(Error::Config(format!("knob n must be an integer >= 2, got {value}")));
                }
                self.n = Some(value as usize);
            }
            "a" => self.a = Some(value),
            "b" => self.b = Some(value),
            "c" => self.c = Some(value),
            "d" => self.d = Some(value),
            "eps" => self.eps = Some(value),
            "alpha" => self.alpha = Some(value),
            other => return Err(Error::Config(format!("unknown knob {other:?}"))),
        }
        Ok(())
    }
}

/// Named preset scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Preset {
    Null,
    Example1S,
    Example1As1,
    Example1As2,
    Example1As3,
    Example2Rank1,
    Exp2_1,
    Exp2_2,
    Exp3_1,
    Exp3_2,
    Exp4Symmetric,
    Exp4Asymmetric,
    Exp4Rank1,
    Exp4SymmetricMm,
    Exp4AsymmetricMm,
    Exp4Rank1Mm,
}

impl Preset {
    pub const ALL: [Preset; 16] = [
        Preset::Null,
        Preset::Example1S,
        Preset::Example1As1,
        Preset::Example1As2,
        Preset::Example1As3,
        Preset::Example2Rank1,
        Preset::Exp2_1,
        Preset::Exp2_2,
        Preset::Exp3_1,
        Preset::Exp3_2,
        Preset::Exp4Symmetric,
        Preset::Exp4Asymmetric,
        Preset::Exp4Rank1,
        Preset::Exp4SymmetricMm,
        Preset::Exp4AsymmetricMm,
        Preset::Exp4Rank1Mm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Null => "null",
            Preset::Example1S => "example1_S",
            Preset::Example1As1 => "example1_AS1",
            Preset::Example1As2 => "example1_AS2",
            Preset::Example1As3 => "example1_AS3",
            Preset::Example2Rank1 => "example2_rank1",
            Preset::Exp2_1 => "exp2_1",
            Preset::Exp2_2 => "exp2_2",
            Preset::Exp3_1 => "exp3_1",
            Preset::Exp3_2 => "exp3_2",
            Preset::Exp4Symmetric => "exp4_symmetric",
            Preset::Exp4Asymmetric => "exp4_asymmetric",
            Preset::Exp4Rank1 => "exp4_rank1",
            Preset::Exp4SymmetricMm => "exp4_symmetric_mm",
            Preset::Exp4AsymmetricMm => "exp4_asymmetric_mm",
            Preset::Exp4Rank1Mm => "exp4_rank1_mm",
        }
    }

    /// Knob names this preset understands.
    pub fn allowed_knobs(&self) -> &'static [&'static str] {
        match self {
            Preset::Null => &["n", "alpha"],
            Preset::Example1S => &["n", "a", "b"],
            Preset::Example1As1 => &["n", "a", "b", "eps"],
            Preset::Example1As2 | Preset::Example1As3 => &["n", "a", "b", "d"],
            Preset::Example2Rank1 => &["n", "a", "b", "c"],
            Preset::Exp2_1 | Preset::Exp3_1 => &["n", "a", "b"],
            Preset::Exp2_2 | Preset::Exp3_2 => &["n", "c"],
            Preset::Exp4Symmetric | Preset::Exp4SymmetricMm => &["n", "a", "b"],
            Preset::Exp4Asymmetric | Preset::Exp4AsymmetricMm => &["n"],
            Preset::Exp4Rank1 | Preset::Exp4Rank1Mm => &["n"],
        }
    }

    /// Whether this preset models the null hypothesis (K = 1).
    pub fn is_null(&self) -> bool {
        matches!(self, Preset::Null)
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let found = Preset::ALL.iter().find(|p| p.name() == s).copied();
        match found {
            Some(p) => Ok(p),
            None => match s {
                "er" | "exp1" => Ok(Preset::Null),
                _ => Err(Error::InvalidParameter(format!(
                    "unknown preset {s:?}; known presets: {}",
                    Preset::ALL.map(|p| p.name()).join(", ")
                ))),
            },
        }
    }
}

impl TryFrom<String> for Preset {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Preset> for String {
    fn from(p: Preset) -> String {
        p.name().to_string()
    }
}

/// A preset instantiated at concrete knob values. `random_offdiag` marks
/// the scenarios whose off-diagonal entry is redrawn uniformly for every
/// generated network.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub preset: Preset,
    pub params: MmsbmParams,
    pub random_offdiag: Option<(f64, f64)>,
}

impl Scenario {
    /// Parameters for one replication; redraws the random off-diagonal
    /// entry from `rng` when the scenario calls for it.
    pub fn replication_params<R: Rng>(&self, rng: &mut R) -> Result<MmsbmParams> {
        match self.random_offdiag {
            None => Ok(self.params.clone()),
            Some((lo, hi)) => {
                let b = lo + (hi - lo) * rng.gen::<f64>();
                let mut p = self.params.p.clone();
                let k = self.params.k;
                for i in 0..k {
                    for j in 0..k {
                        if i != j {
                            p[(i, j)] = b;
                        }
                    }
                }
                MmsbmParams::new(k, self.params.n, p, self.params.membership.clone())
            }
        }
    }
}

fn sym2(a: f64, b: f64, d: f64) -> Result<Matrix> {
    Matrix::from_rows(&[vec![a, b], vec![b, d]])
}

/// P = c * eta eta' with eta = (a, b)' / |(a, b)|.
fn rank1_p(a: f64, b: f64, c: f64) -> Result<Matrix> {
    let norm_sq = a * a + b * b;
    if norm_sq <= 0.0 {
        return Err(Error::InvalidParameter("rank-1 preset needs (a, b) != 0".into()));
    }
    let scale = c / norm_sq;
    Matrix::from_rows(&[
        vec![scale * a * a, scale * a * b],
        vec![scale * a * b, scale * b * b],
    ])
}

/// Membership matrix with all nodes pure and community sizes as equal as
/// possible (first communities absorb the remainder), assigned in blocks.
pub fn balanced_pure_membership(n: usize, k: usize) -> MembershipSpec {
    let mut pi = Matrix::zeros(n, k);
    let base = n / k;
    let extra = n % k;
    let mut node = 0;
    for c in 0..k {
        let count = base + usize::from(c < extra);
        for _ in 0..count {
            pi[(node, c)] = 1.0;
            node += 1;
        }
    }
    MembershipSpec::Fixed { pi }
}

/// Build a preset scenario at the given knob values.
pub fn build_scenario(preset: Preset, knobs: &PresetKnobs) -> Result<Scenario> {
    let give = |v: Option<f64>, dflt: f64| v.unwrap_or(dflt);
    let (params, random_offdiag) = match preset {
        Preset::Null => {
            let n = knobs.n.unwrap_or(200);
            let alpha = give(knobs.alpha, 0.1);
            let p = Matrix::from_rows(&[vec![alpha]])?;
            (
                MmsbmParams::new(1, n, p, MembershipSpec::Pure { h: vec![1.0] })?,
                None,
            )
        }
        Preset::Example1S => {
            let n = knobs.n.unwrap_or(500);
            let a = give(knobs.a, 0.2);
            let b = give(knobs.b, 0.05);
            (
                MmsbmParams::new(
                    2,
                    n,
                    sym2(a, b, a)?,
                    MembershipSpec::Pure { h: vec![0.5, 0.5] },
                )?,
                None,
            )
        }
        Preset::Example1As1 => {
            let n = knobs.n.unwrap_or(500);
            let a = give(knobs.a, 0.2);
            let b = give(knobs.b, 0.15);
            let eps = give(knobs.eps, 0.2);
            (
                MmsbmParams::new(
                    2,
                    n,
                    sym2(a, b, a)?,
                    MembershipSpec::Pure { h: vec![eps, 1.0 - eps] },
                )?,
                None,
            )
        }
        Preset::Example1As2 => {
            let n = knobs.n.unwrap_or(500);
            let a = give(knobs.a, 0.1);
            let b = give(knobs.b, 0.2);
            let d = give(knobs.d, 0.3);
            (
                MmsbmParams::new(
                    2,
                    n,
                    sym2(a, b, d)?,
                    MembershipSpec::Pure { h: vec![0.5, 0.5] },
                )?,
                None,
            )
        }
        Preset::Example1As3 => {
            let n = knobs.n.unwrap_or(500);
            let a = give(knobs.a, 0.19);
            let b = give(knobs.b, 0.1);
            let d = give(knobs.d, 0.21);
            (
                MmsbmParams::new(
                    2,
                    n,
                    sym2(a, b, d)?,
                    MembershipSpec::Pure { h: vec![0.5, 0.5] },
                )?,
                None,
            )
        }
        Preset::Example2Rank1 => {
            let n = knobs.n.unwrap_or(500);
            let a = give(knobs.a, 2.0);
            let b = give(knobs.b, 1.0);
            let c = give(knobs.c, 0.5);
            (
                MmsbmParams::new(
                    2,
                    n,
                    rank1_p(a, b, c)?,
                    MembershipSpec::Pure { h: vec![0.5, 0.5] },
                )?,
                None,
            )
        }
        Preset::Exp2_1 | Preset::Exp3_1 => {
            let n = knobs.n.unwrap_or(300);
            let a = give(knobs.a, 0.2);
            let b = give(knobs.b, if preset == Preset::Exp2_1 { 0.05 } else { 0.1 });
            let k = 5;
            let mut p = Matrix::constant(k, k, b);
            for i in 0..k {
                p[(i, i)] = a;
            }
            (
                MmsbmParams::new(k, n, p, balanced_pure_membership(n, k))?,
                None,
            )
        }
        Preset::Exp2_2 | Preset::Exp3_2 => {
            let n = knobs.n.unwrap_or(300);
            let c = give(knobs.c, if preset == Preset::Exp2_2 { 0.3 } else { 0.06 });
            let a = 1.0 + (n as f64).powf(-0.25);
            (
                MmsbmParams::new(2, n, rank1_p(a, 1.0, c)?, balanced_pure_membership(n, 2))?,
                None,
            )
        }
        Preset::Exp4Symmetric | Preset::Exp4SymmetricMm => {
            let n = knobs.n.unwrap_or(500);
            let a = give(knobs.a, 0.2);
            let b = give(knobs.b, 0.05);
            let membership = if preset == Preset::Exp4Symmetric {
                balanced_pure_membership(n, 2)
            } else {
                MembershipSpec::Dirichlet { a: vec![0.1, 0.1] }
            };
            (MmsbmParams::new(2, n, sym2(a, b, a)?, membership)?, None)
        }
        Preset::Exp4Asymmetric | Preset::Exp4AsymmetricMm => {
            let n = knobs.n.unwrap_or(500);
            let (lo, hi) = (0.125, 0.175);
            let membership = if preset == Preset::Exp4Asymmetric {
                MembershipSpec::Pure { h: vec![0.2, 0.8] }
            } else {
                MembershipSpec::Dirichlet { a: vec![0.2, 0.8] }
            };
            // Nominal parameters sit at the mean off-diagonal; each
            // replication redraws b uniformly from [lo, hi].
            (
                MmsbmParams::new(2, n, sym2(0.2, 0.5 * (lo + hi), 0.2)?, membership)?,
                Some((lo, hi)),
            )
        }
        Preset::Exp4Rank1 | Preset::Exp4Rank1Mm => {
            let n = knobs.n.unwrap_or(500);
            let (exponent, membership) = if preset == Preset::Exp4Rank1 {
                (-0.5, balanced_pure_membership(n, 2))
            } else {
                (-0.4, MembershipSpec::Dirichlet { a: vec![0.4, 0.6] })
            };
            let a = 1.0 + (n as f64).powf(exponent);
            (MmsbmParams::new(2, n, rank1_p(a, 1.0, 1.0)?, membership)?, None)
        }
    };

    Ok(Scenario {
        preset,
        params,
        random_offdiag,
    })
}

/// Parameters and theoretical quantities for a named preset.
pub fn preset_scenario(name: &str, knobs: &PresetKnobs) -> Result<(MmsbmParams, TheoryReport)> {
    let preset: Preset = name.parse()?;
    let scenario = build_scenario(preset, knobs)?;
    let report = theory_report_for_params(&scenario.params)?;
    Ok((scenario.params, report))
}
