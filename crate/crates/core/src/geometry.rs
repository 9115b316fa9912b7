//! Diagonal metric families, affine vector fields, Lie derivatives and
//! homothety classification.
//!
//! Coordinates are `(t, x^1, ..., x^{D-1})`. Every supported vector field is
//! affine, `v(x) = A x + b`, so Lie derivatives and commutators are exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HOMOTHETY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricSpec {
    Minkowski { dim: usize },
    FrwPower { dim: usize, p: f64 },
    FrwLinear,
    Circle2,
}

impl MetricSpec {
    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::Minkowski { dim } | MetricSpec::FrwPower { dim, .. } => *dim,
            MetricSpec::FrwLinear => 4,
            MetricSpec::Circle2 => 2,
        }
    }

    /// Scale-factor exponent `p` in `a(t) = t^p`; `None` for Minkowski.
    fn power(&self) -> Option<f64> {
        match self {
            MetricSpec::Minkowski { .. } => None,
            MetricSpec::FrwPower { p, .. } => Some(*p),
            MetricSpec::FrwLinear | MetricSpec::Circle2 => Some(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() < 2 {
            return Err(Error::InvalidInput(format!("dimension {} < 2", self.dim())));
        }
        if let Some(p) = self.power() {
            if !p.is_finite() {
                return Err(Error::InvalidInput("nonfinite scale exponent".into()));
            }
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "sample has {} coordinates, metric has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if self.power().is_some() && !(x[0] > 0.0) {
            return Err(Error::Domain(format!("t = {} outside t > 0", x[0])));
        }
        Ok(())
    }

    /// Diagonal components `g_{mu mu}` and their `t`-derivatives.
    fn diag(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut g = vec![1.0; d];
        let mut dg = vec![0.0; d];
        g[0] = -1.0;
        if let Some(p) = self.power() {
            for mu in 1..d {
                g[mu] = t.powf(2.0 * p);
                dg[mu] = 2.0 * p * t.powf(2.0 * p - 1.0);
            }
        }
        (g, dg)
    }

    /// Full metric matrix at a sample point, row-major.
    pub fn components(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let d = self.dim();
        let (g, _) = self.diag(x[0]);
        let mut out = vec![0.0; d * d];
        for mu in 0..d {
            out[mu * d + mu] = g[mu];
        }
        Ok(out)
    }

    /// Scalar curvature of the metric.
    pub fn ricci_scalar(&self, t: f64) -> f64 {
        match self.power() {
            None => 0.0,
            Some(p) => {
                let d = self.dim() as f64;
                (d - 1.0) * (2.0 * p * (p - 1.0) + (d - 2.0) * p * p) / (t * t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum VectorFieldSpec {
    /// Constant field; `direction` has one entry per coordinate.
    Translation { direction: Vec<f64> },
    /// Spatial rotation about `axis` (D = 4 only).
    Rotation { axis: [f64; 3] },
    /// `x^mu d_mu`.
    Dilation,
    /// `t d_t + (1 - p) x^i d_i`.
    FrwHomothety { p: f64 },
    /// `t d_t`.
    TimeDilation,
    /// `coefficient * d_phi` on the circle model.
    CircleRotation { coefficient: f64 },
    /// `A x + b`, `A` row-major.
    Affine { matrix: Vec<f64>, shift: Vec<f64> },
    /// `beta v + gamma w`.
    Combine {
        beta: f64,
        v: Box<VectorFieldSpec>,
        gamma: f64,
        w: Box<VectorFieldSpec>,
    },
}

/// `v(x) = A x + b` in a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    pub dim: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl AffineField {
    fn zero(dim: usize) -> Self {
        Self { dim, a: vec![0.0; dim * dim], b: vec![0.0; dim] }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|mu| self.b[mu] + (0..d).map(|nu| self.a[mu * d + nu] * x[nu]).sum::<f64>())
            .collect()
    }

    fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i * self.dim + i]).sum()
    }
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl VectorFieldSpec {
    pub fn translation_axis(dim: usize, axis: usize) -> Self {
        let mut direction = vec![0.0; dim];
        direction[axis] = 1.0;
        VectorFieldSpec::Translation { direction }
    }

    pub fn scaled(self, factor: f64) -> Self {
        VectorFieldSpec::Combine {
            beta: factor,
            v: Box::new(self),
            gamma: 0.0,
            w: Box::new(VectorFieldSpec::Dilation),
        }
    }

    pub fn affine(&self, dim: usize) -> Result<AffineField> {
        let mut f = AffineField::zero(dim);
        match self {
            VectorFieldSpec::Translation { direction } => {
                if direction.len() != dim || !finite(direction) {
                    return Err(Error::InvalidInput(format!(
                        "translation needs {dim} finite components"
                    )));
                }
                f.b.clone_from(direction);
            }
            VectorFieldSpec::Rotation { axis } => {
                if dim != 4 {
                    return Err(Error::InvalidInput("rotations need dimension 4".into()));
                }
                if !finite(axis) || axis.iter().all(|&a| a == 0.0) {
                    return Err(Error::InvalidInput("rotation axis must be finite and nonzero".into()));
                }
                // v^j = eta^k eps_{kij} x^i
                for (k, &eta) in axis.iter().enumerate() {
                    for i in 0..3 {
                        for j in 0..3 {
                            f.a[(j + 1) * dim + (i + 1)] += eta * levi_civita(k, i, j);
                        }
                    }
                }
            }
            VectorFieldSpec::Dilation => {
                for mu in 0..dim {
                    f.a[mu * dim + mu] = 1.0;
                }
            }
            VectorFieldSpec::FrwHomothety { p } => {
                if !p.is_finite() {
                    return Err(Error::InvalidInput("nonfinite exponent".into()));
                }
                f.a[0] = 1.0;
                for i in 1..dim {
                    f.a[i * dim + i] = 1.0 - p;
                }
            }
            VectorFieldSpec::TimeDilation => f.a[0] = 1.0,
            VectorFieldSpec::CircleRotation { coefficient } => {
                if dim != 2 || !coefficient.is_finite() {
                    return Err(Error::InvalidInput(
                        "circle rotation needs dimension 2 and a finite coefficient".into(),
                    ));
                }
                f.b[1] = *coefficient;
            }
            VectorFieldSpec::Affine { matrix, shift } => {
                if matrix.len() != dim * dim || shift.len() != dim || !finite(matrix) || !finite(shift) {
                    return Err(Error::InvalidInput(format!("affine field needs a {dim}x{dim} matrix")));
                }
                f.a.clone_from(matrix);
                f.b.clone_from(shift);
            }
            VectorFieldSpec::Combine { beta, v, gamma, w } => {
                let (fv, fw) = (v.affine(dim)?, w.affine(dim)?);
                for (o, (x, y)) in f.a.iter_mut().zip(fv.a.iter().zip(&fw.a)) {
                    *o = beta * x + gamma * y;
                }
                for (o, (x, y)) in f.b.iter_mut().zip(fv.b.iter().zip(&fw.b)) {
                    *o = beta * x + gamma * y;
                }
            }
        }
        Ok(f)
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Default sample lattice: 5 points per axis, `t in [1, 2]`, `|x^i| <= 1`.
pub fn default_samples(dim: usize) -> Vec<Vec<f64>> {
    let axis = |mu: usize, j: usize| {
        if mu == 0 {
            1.0 + j as f64 / 4.0
        } else {
            -1.0 + j as f64 / 2.0
        }
    };
    let total = 5usize.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            (0..dim)
                .map(|mu| {
                    let j = idx % 5;
                    idx /= 5;
                    axis(mu, j)
                })
                .collect()
        })
        .collect()
}

/// `L_v g` at each sample, each a row-major `D x D` matrix.
pub fn lie_metric(metric: &MetricSpec, v: &VectorFieldSpec, samples: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    metric.validate()?;
    let d = metric.dim();
    let f = v.affine(d)?;
    samples
        .iter()
        .map(|x| {
            metric.check_point(x)?;
            let (g, dg) = metric.diag(x[0]);
            let vt = f.eval(x)[0];
            let mut out = vec![0.0; d * d];
            for mu in 0..d {
                for nu in 0..d {
                    let mut val = g[nu] * f.a[nu * d + mu] + g[mu] * f.a[mu * d + nu];
                    if mu == nu {
                        val += vt * dg[mu];
                    }
                    out[mu * d + nu] = val;
                }
            }
            Ok(out)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomothetyReport {
    pub is_homothetic: bool,
    pub is_killing: bool,
    pub c: f64,
    pub max_residual: f64,
}

pub fn classify_homothety(metric: &MetricSpec, v: &VectorFieldSpec) -> Result<HomothetyReport> {
    classify_homothety_with(metric, v, &default_samples(metric.dim()), HOMOTHETY_TOL)
}

/// Least-squares homothety constant over `samples` and the worst relative
/// residual `|L_v g - c g| / |g|` (Frobenius).
pub fn classify_homothety_with(
    metric: &MetricSpec,
    v: &VectorFieldSpec,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<HomothetyReport> {
    let lie = lie_metric(metric, v, samples)?;
    let gs: Vec<Vec<f64>> = samples.iter().map(|x| metric.components(x)).collect::<Result<_>>()?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let num: f64 = lie.iter().zip(&gs).map(|(l, g)| dot(l, g)).sum();
    let den: f64 = gs.iter().map(|g| dot(g, g)).sum();
    let c = num / den;
    let max_residual = lie
        .iter()
        .zip(&gs)
        .map(|(l, g)| {
            let r: f64 = l.iter().zip(g).map(|(a, b)| (a - c * b).powi(2)).sum();
            (r / dot(g, g)).sqrt()
        })
        .fold(0.0, f64::max);
    let is_homothetic = max_residual < tol;
    Ok(HomothetyReport {
        is_homothetic,
        is_killing: is_homothetic && c.abs() < tol,
        c,
        max_residual,
    })
}

/// `[v, w]` as an affine field: `(B A - A B) x + (B a - A b)`.
pub fn commutator_field(v: &VectorFieldSpec, w: &VectorFieldSpec, dim: usize) -> Result<VectorFieldSpec> {
    let (fv, fw) = (v.affine(dim)?, w.affine(dim)?);
    let d = dim;
    let mut matrix = vec![0.0; d * d];
    let mut shift = vec![0.0; d];
    for mu in 0..d {
        for nu in 0..d {
            matrix[mu * d + nu] = (0..d)
                .map(|r| fw.a[mu * d + r] * fv.a[r * d + nu] - fv.a[mu * d + r] * fw.a[r * d + nu])
                .sum();
        }
        shift[mu] = (0..d)
            .map(|r| fw.a[mu * d + r] * fv.b[r] - fv.a[mu * d + r] * fw.b[r])
            .sum();
    }
    Ok(VectorFieldSpec::Affine { matrix, shift })
}

/// Components of `[v, w]` at each sample.
pub fn commutator(v: &VectorFieldSpec, w: &VectorFieldSpec, samples: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let Some(dim) = samples.first().map(Vec::len) else {
        return Ok(Vec::new());
    };
    let f = commutator_field(v, w, dim)?.affine(dim)?;
    Ok(samples.iter().map(|x| f.eval(x)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFacts {
    pub c: f64,
    pub vol_scale: f64,
    pub curv_scale: f64,
}

/// `L_v vol = (cD/2) vol` and `L_v R = -c R`, cross-checked on the samples
/// against the analytic volume density and curvature.
pub fn scaling_facts(metric: &MetricSpec, v: &VectorFieldSpec) -> Result<ScalingFacts> {
    let report = classify_homothety(metric, v)?;
    if !report.is_homothetic {
        return Err(Error::NotHomothetic { residual: report.max_residual });
    }
    let d = metric.dim();
    let c = report.c;
    let facts = ScalingFacts {
        c,
        vol_scale: c * d as f64 / 2.0,
        curv_scale: -c,
    };
    let f = v.affine(d)?;
    for x in default_samples(d) {
        let vt = f.eval(&x)[0];
        let (g, dg) = metric.diag(x[0]);
        let dlog: f64 = g.iter().zip(&dg).map(|(a, b)| b / a).sum();
        let vol = 0.5 * vt * dlog + f.trace();
        if (vol - facts.vol_scale).abs() > 1e-9 * (1.0 + facts.vol_scale.abs()) {
            return Err(Error::CrossCheck(format!(
                "volume scaling {vol} vs {}",
                facts.vol_scale
            )));
        }
        let r = metric.ricci_scalar(x[0]);
        if r != 0.0 {
            let lr = vt * (-2.0 * r / x[0]);
            if (lr - facts.curv_scale * r).abs() > 1e-9 * r.abs() {
                return Err(Error::CrossCheck(format!(
                    "curvature scaling {} vs {}",
                    lr / r,
                    facts.curv_scale
                )));
            }
        }
    }
    Ok(facts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frw(p: f64) -> MetricSpec {
        MetricSpec::FrwPower { dim: 4, p }
    }

    #[test]
    fn minkowski_dilation_doubles_metric() {
        let r = classify_homothety(&MetricSpec::Minkowski { dim: 4 }, &VectorFieldSpec::Dilation).unwrap();
        assert!(r.is_homothetic && !r.is_killing);
        assert!((r.c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn frw_family_homothety() {
        for p in [0.5, 2.0 / 3.0, 1.0, 3.0] {
            let r = classify_homothety(&frw(p), &VectorFieldSpec::FrwHomothety { p }).unwrap();
            assert!(r.is_homothetic, "p={p}: {}", r.max_residual);
            assert!((r.c - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn translations_are_killing() {
        for m in [MetricSpec::Minkowski { dim: 3 }, MetricSpec::FrwLinear, MetricSpec::Circle2] {
            let d = m.dim();
            for axis in 1..d {
                let r = classify_homothety(&m, &VectorFieldSpec::translation_axis(d, axis)).unwrap();
                assert!(r.is_killing, "{m:?} axis {axis}");
            }
        }
    }

    #[test]
    fn circle_time_dilation() {
        let r = classify_homothety(&MetricSpec::Circle2, &VectorFieldSpec::TimeDilation).unwrap();
        assert!(r.is_homothetic);
        assert!((r.c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shear_is_not_homothetic() {
        let mut matrix = vec![0.0; 16];
        matrix[2 * 4 + 1] = 1.0; // v = x^1 d_2
        let v = VectorFieldSpec::Affine { matrix, shift: vec![0.0; 4] };
        let r = classify_homothety(&MetricSpec::Minkowski { dim: 4 }, &v).unwrap();
        assert!(!r.is_homothetic);
        assert!(r.max_residual > 0.1);
    }

    #[test]
    fn rotations_are_killing_on_frw() {
        let r = classify_homothety(&MetricSpec::FrwLinear, &VectorFieldSpec::Rotation { axis: [0.3, -1.0, 2.0] })
            .unwrap();
        assert!(r.is_killing);
    }

    #[test]
    fn nonpositive_time_rejected() {
        let e = lie_metric(&MetricSpec::FrwLinear, &VectorFieldSpec::Dilation, &[vec![0.0, 0.0, 0.0, 0.0]]);
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn commutators() {
        let samples = default_samples(4);
        let d1 = VectorFieldSpec::translation_axis(4, 1);
        let c = commutator(&d1, &VectorFieldSpec::TimeDilation, &samples).unwrap();
        assert!(c.iter().flatten().all(|&x| x == 0.0));
        let c = commutator(&VectorFieldSpec::Dilation, &d1, &samples).unwrap();
        for v in &c {
            assert_eq!(v, &vec![0.0, -1.0, 0.0, 0.0]);
        }
        let c = commutator(&d1, &d1, &samples).unwrap();
        assert!(c.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn scaling_facts_examples() {
        let f = scaling_facts(&MetricSpec::FrwLinear, &VectorFieldSpec::FrwHomothety { p: 1.0 }).unwrap();
        assert!((f.vol_scale - 4.0).abs() < 1e-12 && (f.curv_scale + 2.0).abs() < 1e-12);
        let f = scaling_facts(&MetricSpec::Circle2, &VectorFieldSpec::TimeDilation).unwrap();
        assert!((f.vol_scale - 2.0).abs() < 1e-12);
        let f = scaling_facts(&MetricSpec::FrwLinear, &VectorFieldSpec::translation_axis(4, 2)).unwrap();
        assert!(f.vol_scale.abs() < 1e-12 && f.curv_scale.abs() < 1e-12);
        let shear = VectorFieldSpec::Affine {
            matrix: (0..16).map(|i| if i == 9 { 1.0 } else { 0.0 }).collect(),
            shift: vec![0.0; 4],
        };
        assert!(matches!(
            scaling_facts(&MetricSpec::FrwLinear, &shear),
            Err(Error::NotHomothetic { .. })
        ));
    }

    fn homothetic_member() -> impl Strategy<Value = VectorFieldSpec> {
        (
            -2.0..2.0f64,
            prop::array::uniform3(-2.0..2.0f64),
            prop::array::uniform3(-2.0..2.0f64),
        )
            .prop_map(|(h, tr, rot)| {
                let direction = vec![0.0, tr[0], tr[1], tr[2]];
                let k = VectorFieldSpec::Combine {
                    beta: 1.0,
                    v: Box::new(VectorFieldSpec::Translation { direction }),
                    gamma: 1.0,
                    w: Box::new(VectorFieldSpec::Rotation { axis: [rot[0], rot[1], rot[2] + 1e-3] }),
                };
                VectorFieldSpec::Combine {
                    beta: h,
                    v: Box::new(VectorFieldSpec::FrwHomothety { p: 1.0 }),
                    gamma: 1.0,
                    w: Box::new(k),
                }
            })
    }

    proptest! {
        #[test]
        fn bracket_of_homotheties_is_killing(v in homothetic_member(), w in homothetic_member()) {
            let m = MetricSpec::FrwLinear;
            let vw = commutator_field(&v, &w, 4).unwrap();
            let r = classify_homothety(&m, &vw).unwrap();
            prop_assert!(r.is_killing, "{:?}", r);
        }

        #[test]
        fn homothety_constant_is_linear(
            v in homothetic_member(), w in homothetic_member(),
            beta in -3.0..3.0f64, gamma in -3.0..3.0f64,
        ) {
            let m = MetricSpec::FrwLinear;
            let cv = classify_homothety(&m, &v).unwrap().c;
            let cw = classify_homothety(&m, &w).unwrap().c;
            let comb = VectorFieldSpec::Combine { beta, v: Box::new(v), gamma, w: Box::new(w) };
            let r = classify_homothety(&m, &comb).unwrap();
            prop_assert!(r.is_homothetic);
            prop_assert!((r.c - (beta * cv + gamma * cw)).abs() < 1e-10 * (1.0 + r.c.abs()));
        }
    }
}
