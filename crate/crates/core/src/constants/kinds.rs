use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The inequality whose best constant a ratio bounds from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InequalityKind {
    /// `alpha_p`: `||x||_{H^p} <= alpha_p ||x||_p`.
    BgLower,
    /// `beta_p`: `||x||_p <= beta_p ||x||_{H^p}`.
    BgUpper,
    /// `gamma_p`: Stein inequality for column square functions.
    Stein,
    /// `delta'_p`: dual Doob inequality for positive sequences.
    DoobDual,
    /// `kappa_p`: martingale transforms by signs.
    Transform,
    /// Weak type `(1, 1)` bound for martingale transforms.
    TransformWeak,
    /// `H^1_max` versus `H^1` on positive martingales.
    HmaxGap,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 7] = [
        InequalityKind::BgLower,
        InequalityKind::BgUpper,
        InequalityKind::Stein,
        InequalityKind::DoobDual,
        InequalityKind::Transform,
        InequalityKind::TransformWeak,
        InequalityKind::HmaxGap,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            InequalityKind::BgLower => "BG_LOWER",
            InequalityKind::BgUpper => "BG_UPPER",
            InequalityKind::Stein => "STEIN",
            InequalityKind::DoobDual => "DOOB_DUAL",
            InequalityKind::Transform => "TRANSFORM",
            InequalityKind::TransformWeak => "TRANSFORM_WEAK",
            InequalityKind::HmaxGap => "HMAX_GAP",
        }
    }

    /// Whether [`hilbert_witness`](super::hilbert_witness) has an explicit
    /// construction for this kind.
    pub fn has_hilbert_witness(self) -> bool {
        matches!(
            self,
            InequalityKind::BgLower
                | InequalityKind::Stein
                | InequalityKind::DoobDual
                | InequalityKind::HmaxGap
        )
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for InequalityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        InequalityKind::ALL
            .into_iter()
            .find(|k| k.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::input(format!("unknown inequality kind `{s}`")))
    }
}

/// What a [`ConstantEstimate`](super::ConstantEstimate) bounds: an
/// inequality constant or the triangular projection norm `t_{p,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimateKind {
    Inequality(InequalityKind),
    Triproj,
}

impl EstimateKind {
    pub const TRIPROJ_TAG: &'static str = "TRIPROJ";
}

impl From<InequalityKind> for EstimateKind {
    fn from(k: InequalityKind) -> Self {
        EstimateKind::Inequality(k)
    }
}

impl fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateKind::Inequality(k) => f.write_str(k.tag()),
            EstimateKind::Triproj => f.write_str(Self::TRIPROJ_TAG),
        }
    }
}

impl FromStr for EstimateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s.trim().eq_ignore_ascii_case(Self::TRIPROJ_TAG) {
            Ok(EstimateKind::Triproj)
        } else {
            s.parse().map(EstimateKind::Inequality)
        }
    }
}

impl TryFrom<String> for EstimateKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<EstimateKind> for String {
    fn from(k: EstimateKind) -> Self {
        k.to_string()
    }
}
