use serde::{Deserialize, Serialize};

use super::FormalSeries;
use crate::error::{Error, Result};

/// Elementary function of the Killing direction that a symbol stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    /// `cos(u)`: the factor of the deformed wave operator.
    CosMultiplier,
    /// `cos(u)^{-1}`: the factor of the deformed Green's operators.
    SecMultiplier,
    /// `cos(u)^{-1/2}`: the S-map.
    SqrtSecMultiplier,
    /// `cos(u)^{1/2}`: the inverse S-map.
    SqrtCosMultiplier,
    /// `exp(-i u)`: the phase relating the two scalar-valued wave operators.
    Phase,
    Identity,
}

/// A function of `u = prefactor * lambda * X_1`.
///
/// On a plane wave along the Killing direction `X_1 -> -i k_1`, so the symbol
/// is evaluated at the imaginary point `u = -i s`, `s = prefactor * lambda * k_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSymbol {
    pub kind: SymbolKind,
    pub prefactor: f64,
}

impl OperatorSymbol {
    pub fn new(kind: SymbolKind, prefactor: f64) -> Result<Self> {
        if !prefactor.is_finite() {
            return Err(Error::InvalidInput("symbol prefactor must be finite".into()));
        }
        Ok(Self { kind, prefactor })
    }

    /// Symbol with the equation-of-motion prefactor `c (D + 2) / 4`
    /// (or `c D / 4` for the phase).
    pub fn for_model(kind: SymbolKind, c: f64, dim: usize) -> Result<Self> {
        let d = dim as f64;
        let prefactor = match kind {
            SymbolKind::Phase => c * d / 4.0,
            _ => c * (d + 2.0) / 4.0,
        };
        Self::new(kind, prefactor)
    }

    /// The truncated expansion in `u`, when the kind has a real one.
    pub fn series(&self, order: usize) -> Option<FormalSeries> {
        match self.kind {
            SymbolKind::CosMultiplier => Some(FormalSeries::cos(order)),
            SymbolKind::SecMultiplier => Some(FormalSeries::sec(order)),
            SymbolKind::SqrtSecMultiplier => Some(FormalSeries::sqrt_sec(order)),
            SymbolKind::SqrtCosMultiplier => Some(FormalSeries::sqrt_cos(order)),
            SymbolKind::Identity => Some(FormalSeries::one(order)),
            SymbolKind::Phase => None,
        }
    }

    /// Closed form at `u = -i s`.
    pub fn exact_at(&self, s: f64) -> f64 {
        match self.kind {
            SymbolKind::CosMultiplier => s.cosh(),
            SymbolKind::SecMultiplier => 1.0 / s.cosh(),
            SymbolKind::SqrtSecMultiplier => (1.0 / s.cosh()).sqrt(),
            SymbolKind::SqrtCosMultiplier => s.cosh().sqrt(),
            SymbolKind::Phase => (-s).exp(),
            SymbolKind::Identity => 1.0,
        }
    }

    /// Truncated expansion at `u = -i s`.
    pub fn truncated_at(&self, s: f64, order: usize) -> f64 {
        match self.series(order) {
            Some(series) => series.eval(num_complex::Complex64::new(0.0, -s)).re,
            None => {
                // exp(-i u) at u = -i s is exp(-s)
                let mut term = 1.0;
                let mut acc = 1.0;
                for n in 1..=order {
                    term *= -s / n as f64;
                    acc += term;
                }
                acc
            }
        }
    }
}

/// Evaluates a symbol on the plane-wave mode with Killing momentum `k1`.
///
/// `exact` selects the closed form; otherwise the order-`order` truncation is
/// summed, which only tracks the closed form inside `|s| < pi/2`.
pub fn mode_symbol_eval(
    sym: &OperatorSymbol,
    k1: f64,
    lambda: f64,
    exact: bool,
    order: usize,
) -> Result<f64> {
    if !(k1.is_finite() && lambda.is_finite() && sym.prefactor.is_finite()) {
        return Err(Error::Domain("nonfinite symbol argument".into()));
    }
    let s = sym.prefactor * lambda * k1;
    Ok(if exact {
        sym.exact_at(s)
    } else {
        sym.truncated_at(s, order)
    })
}
