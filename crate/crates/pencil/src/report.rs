//! Serializable views of core results.

use pencil_core::pseudospectra::{ShatterReport, Violation};
use pencil_core::{c64, Eigenvalue};
use serde::{Deserialize, Serialize};

/// `{"re": .., "im": ..}`, or the string `"inf"` for the point at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EigenvalueRepr {
    Finite { re: f64, im: f64 },
    Infinite(InfinityTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfinityTag {
    #[serde(rename = "inf")]
    Inf,
}

impl From<Eigenvalue> for EigenvalueRepr {
    fn from(e: Eigenvalue) -> Self {
        match e {
            Eigenvalue::Finite(z) => EigenvalueRepr::Finite { re: z.re, im: z.im },
            Eigenvalue::Infinite => EigenvalueRepr::Infinite(InfinityTag::Inf),
        }
    }
}

impl From<EigenvalueRepr> for Eigenvalue {
    fn from(e: EigenvalueRepr) -> Self {
        match e {
            EigenvalueRepr::Finite { re, im } => Eigenvalue::Finite(c64::new(re, im)),
            EigenvalueRepr::Infinite(_) => Eigenvalue::Infinite,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<c64> for Complex {
    fn from(z: c64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationRepr {
    GridPointInPseudospectrum { z: Complex, ratio: f64 },
    EigenvalueOutsideGrid { eigenvalue: EigenvalueRepr },
    EigenvalueOnGridLine { z: Complex },
    SharedBox { i: u64, j: u64, count: usize },
}

impl From<&Violation> for ViolationRepr {
    fn from(v: &Violation) -> Self {
        match *v {
            Violation::GridPointInPseudospectrum { z, ratio } => {
                ViolationRepr::GridPointInPseudospectrum { z: z.into(), ratio }
            }
            Violation::EigenvalueOutsideGrid(e) => ViolationRepr::EigenvalueOutsideGrid { eigenvalue: e.into() },
            Violation::EigenvalueOnGridLine(z) => ViolationRepr::EigenvalueOnGridLine { z: z.into() },
            Violation::SharedBox { i, j, count } => ViolationRepr::SharedBox { i, j, count },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueBox {
    pub z: Complex,
    pub i: u64,
    pub j: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShatterReportRepr {
    pub shattered: bool,
    pub min_grid_sigma_ratio: f64,
    pub eigenvalue_boxes: Vec<EigenvalueBox>,
    pub violations: Vec<ViolationRepr>,
    pub evaluated_samples: usize,
    pub total_samples: usize,
}

impl From<&ShatterReport> for ShatterReportRepr {
    fn from(r: &ShatterReport) -> Self {
        ShatterReportRepr {
            shattered: r.shattered,
            min_grid_sigma_ratio: r.min_grid_sigma_ratio,
            eigenvalue_boxes: r
                .eigenvalue_boxes
                .iter()
                .map(|&(z, (i, j))| EigenvalueBox { z: z.into(), i, j })
                .collect(),
            violations: r.violations.iter().map(ViolationRepr::from).collect(),
            evaluated_samples: r.evaluated_samples,
            total_samples: r.total_samples,
        }
    }
}
