//! Scalar base kernels, their input derivatives, and Gram matrices.

use std::fmt;

use crate::error::{domain, Result};
use crate::linalg::Matrix;

/// Tolerance under which a Gram matrix eigenvalue still counts as non-negative.
pub const PSD_TOLERANCE: f64 = -1e-10;

/// Default rational-quadratic parameter `c`.
pub const DEFAULT_RQ_C: f64 = 1.0;

/// Which rational-quadratic formula to use.
///
/// `PaperPlus` is `1 + r²/(r² + c)`, bounded in `[1, 2)`; its Gram matrices
/// are not positive semi-definite in general. `StandardMinus` is the usual
/// `c/(r² + c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RqVariant {
    #[default]
    PaperPlus,
    StandardMinus,
}

/// The family of a base kernel, without its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Gaussian,
    RationalQuadratic,
    Polynomial2,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::RationalQuadratic => "rq",
            Self::Polynomial2 => "poly2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "rbf" => Some(Self::Gaussian),
            "rq" | "rational_quadratic" => Some(Self::RationalQuadratic),
            "poly2" | "polynomial2" => Some(Self::Polynomial2),
            _ => None,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A one-dimensional base kernel `κ(s, d)` with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `exp(-γ (s - d)²)`
    Gaussian { gamma: f64 },
    RationalQuadratic { c: f64, variant: RqVariant },
    /// `(1 + s d)²`
    Polynomial2,
}

impl KernelSpec {
    pub fn gaussian(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return domain(format!("gaussian bandwidth must be positive, got {gamma}"));
        }
        Ok(Self::Gaussian { gamma })
    }

    pub fn rational_quadratic(c: f64, variant: RqVariant) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("rational-quadratic c must be positive, got {c}"));
        }
        Ok(Self::RationalQuadratic { c, variant })
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            Self::Gaussian { .. } => KernelKind::Gaussian,
            Self::RationalQuadratic { .. } => KernelKind::RationalQuadratic,
            Self::Polynomial2 => KernelKind::Polynomial2,
        }
    }

    /// Whether Gram matrices of this kernel are guaranteed PSD.
    pub fn is_psd(&self) -> bool {
        !matches!(
            self,
            Self::RationalQuadratic {
                variant: RqVariant::PaperPlus,
                ..
            }
        )
    }

    #[inline]
    pub fn eval(&self, s: f64, d: f64) -> f64 {
        match *self {
            Self::Gaussian { gamma } => {
                let r = s - d;
                (-gamma * r * r).exp()
            }
            Self::RationalQuadratic { c, variant } => {
                let r2 = (s - d) * (s - d);
                match variant {
                    RqVariant::PaperPlus => 1.0 + r2 / (r2 + c),
                    RqVariant::StandardMinus => c / (r2 + c),
                }
            }
            Self::Polynomial2 => {
                let p = 1.0 + s * d;
                p * p
            }
        }
    }

    /// `∂κ/∂s`.
    #[inline]
    pub fn grad_s(&self, s: f64, d: f64) -> f64 {
        self.grad_s_given_value(s, d, self.eval(s, d))
    }

    /// `∂κ/∂s` when `value = κ(s, d)` is already known; saves the Gaussian's
    /// exponential.
    #[inline]
    pub fn grad_s_given_value(&self, s: f64, d: f64, value: f64) -> f64 {
        match *self {
            Self::Gaussian { gamma } => -2.0 * gamma * (s - d) * value,
            Self::RationalQuadratic { c, variant } => {
                let r = s - d;
                let den = r * r + c;
                let g = 2.0 * r * c / (den * den);
                match variant {
                    RqVariant::PaperPlus => g,
                    RqVariant::StandardMinus => -g,
                }
            }
            Self::Polynomial2 => 2.0 * (1.0 + s * d) * d,
        }
    }
}

/// Bandwidth rule of thumb `γ = 1 / (6 Δ²)` for dictionary spacing `Δ`.
pub fn gamma_rule_of_thumb(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return domain(format!("dictionary spacing must be positive, got {delta}"));
    }
    Ok(1.0 / (6.0 * delta * delta))
}

/// `K[i][j] = κ(points[i], points[j])`.
pub fn gram_matrix(spec: &KernelSpec, points: &[f64]) -> Result<Matrix> {
    if points.is_empty() {
        return domain("gram matrix of an empty point set");
    }
    Ok(Matrix::from_fn(points.len(), |i, j| spec.eval(points[i], points[j])))
}

/// `Σᵢ Σⱼ cᵢ cⱼ K[i][j]`.
pub fn quadratic_form(gram: &Matrix, coeffs: &[f64]) -> Result<f64> {
    if coeffs.len() != gram.dim() {
        return domain(format!(
            "coefficient vector has length {}, gram is {}x{}",
            coeffs.len(),
            gram.dim(),
            gram.dim()
        ));
    }
    let mut acc = 0.0;
    for (i, ci) in coeffs.iter().enumerate() {
        for (j, cj) in coeffs.iter().enumerate() {
            acc += ci * cj * gram.get(i, j);
        }
    }
    Ok(acc)
}

/// Smallest eigenvalue of a symmetric Gram matrix.
pub fn min_eigenvalue(gram: &Matrix) -> f64 {
    gram.symmetric_eigenvalues()
        .first()
        .copied()
        .unwrap_or(f64::NAN)
}

/// `min_eigenvalue(gram) >= PSD_TOLERANCE`.
pub fn is_positive_semidefinite(gram: &Matrix) -> bool {
    min_eigenvalue(gram) >= PSD_TOLERANCE
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_specs() -> Vec<KernelSpec> {
        vec![
            KernelSpec::gaussian(0.9).unwrap(),
            KernelSpec::rational_quadratic(1.0, RqVariant::PaperPlus).unwrap(),
            KernelSpec::rational_quadratic(0.5, RqVariant::StandardMinus).unwrap(),
            KernelSpec::Polynomial2,
        ]
    }

    #[test]
    fn trivial_values() {
        let g = KernelSpec::gaussian(3.7).unwrap();
        assert_eq!(g.eval(0.7, 0.7), 1.0);
        assert_eq!(KernelSpec::Polynomial2.eval(1.0, 1.0), 4.0);
        let rq = KernelSpec::rational_quadratic(1.0, RqVariant::PaperPlus).unwrap();
        assert_eq!(rq.eval(0.3, 0.3), 1.0);
        let rq = KernelSpec::rational_quadratic(2.0, RqVariant::StandardMinus).unwrap();
        assert_eq!(rq.eval(-1.0, -1.0), 1.0);
    }

    #[test]
    fn gaussian_at_rule_of_thumb_bandwidth() {
        let gamma = gamma_rule_of_thumb(3.0 / 7.0).unwrap();
        let k = KernelSpec::gaussian(gamma).unwrap();
        // exp(-49/216), evaluated independently in extended precision
        assert!((k.eval(0.5, 0.0) - 0.797_038_853_374_047).abs() < 1e-12);
    }

    #[test]
    fn trivial_gradients() {
        let g = KernelSpec::gaussian(2.0).unwrap();
        assert_eq!(g.grad_s(0.4, 0.4), 0.0);
        assert_eq!(KernelSpec::Polynomial2.grad_s(0.0, 2.0), 4.0);
    }

    #[test]
    fn rule_of_thumb() {
        assert_eq!(gamma_rule_of_thumb(1.0).unwrap(), 1.0 / 6.0);
        assert!((gamma_rule_of_thumb(3.0 / 7.0).unwrap() - 49.0 / 54.0).abs() < 1e-12);
        assert!(gamma_rule_of_thumb(0.0).is_err());
        assert!(gamma_rule_of_thumb(-1.0).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::rational_quadratic(-1.0, RqVariant::PaperPlus).is_err());
    }

    #[test]
    fn gram_basics() {
        let g = gram_matrix(&KernelSpec::gaussian(1.0).unwrap(), &[0.0]).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert!(gram_matrix(&KernelSpec::Polynomial2, &[]).is_err());
        let pts = [-1.3, 0.2, 0.9, 2.5];
        for spec in all_specs() {
            let g = gram_matrix(&spec, &pts).unwrap();
            assert_eq!(g, g.transpose());
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    assert_eq!(g.get(i, j), spec.eval(pts[i], pts[j]));
                }
            }
        }
    }

    #[test]
    fn quadratic_form_basics() {
        let g = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert_eq!(quadratic_form(&g, &[2.0]).unwrap(), 4.0);
        let g = gram_matrix(&KernelSpec::Polynomial2, &[0.0, 1.0]).unwrap();
        assert_eq!(quadratic_form(&g, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(quadratic_form(&g, &[1.0]).is_err());
    }

    #[test]
    fn symmetric_in_arguments() {
        for spec in all_specs() {
            for &(s, d) in &[(0.3, -1.2), (2.0, 0.5), (-0.7, -0.1)] {
                assert_eq!(spec.eval(s, d), spec.eval(d, s));
            }
        }
    }
}
