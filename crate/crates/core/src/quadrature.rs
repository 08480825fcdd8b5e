//! Adaptive Gauss-Legendre quadrature in MPFR precision.

use std::cmp::Ordering;

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};

/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<Float>,
    weights: Vec<Float>,
    prec: u32,
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p_prev = Float::with_val(prec, 1);
    let mut p = x.clone();
    for k in 1..n as u32 {
        let mut next = Float::with_val(prec, x * &p) * (2 * k + 1);
        next -= Float::with_val(prec, &p_prev * k);
        next /= k + 1;
        p_prev = std::mem::replace(&mut p, next);
    }
    (p, p_prev)
}

impl GaussLegendre {
    pub fn new(n: usize, prec: u32) -> Self {
        assert!(n >= 2, "Gauss-Legendre rule needs at least two nodes");
        let work = prec + 32;
        let pi = Float::with_val(work, Constant::Pi);
        let tol = Float::with_val(work, Float::u_exp(1, -(prec as i32)));
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 1..=n {
            let guess = (i as f64 - 0.25) / (n as f64 + 0.5);
            let mut x = Float::with_val(work, &pi * guess).cos();
            for _ in 0..200 {
                let (p, p_prev) = legendre_pair(n, &x);
                // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
                let x_sq_m1 = Float::with_val(work, x.square_ref()) - 1u32;
                let derivative = (Float::with_val(work, &x * &p) - &p_prev) * n as u32 / x_sq_m1;
                let step = Float::with_val(work, &p / &derivative);
                x -= &step;
                if step.abs() < tol {
                    break;
                }
            }
            let (p, p_prev) = legendre_pair(n, &x);
            let x_sq_m1 = Float::with_val(work, x.square_ref()) - 1u32;
            let derivative = (Float::with_val(work, &x * &p) - &p_prev) * n as u32 / x_sq_m1;
            let one_m_x2 = Float::with_val(work, 1) - Float::with_val(work, x.square_ref());
            let w = Float::with_val(work, 2) / (one_m_x2 * derivative.square());
            nodes.push(Float::with_val(prec, x));
            weights.push(Float::with_val(prec, w));
        }
        Self {
            nodes,
            weights,
            prec,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F>(&self, f: &F, a: &Float, b: &Float) -> Result<Float>
    where
        F: Fn(&Float) -> Result<Float>,
    {
        let half = Float::with_val(self.prec, b - a) / 2u32;
        let mid = Float::with_val(self.prec, a + b) / 2u32;
        let mut sum = Float::new(self.prec);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let mut t = Float::with_val(self.prec, &half * x);
            t += &mid;
            // keep nodes inside [a, b] after rounding
            let t = t.clamp(a, b);
            sum += Float::with_val(self.prec, w * &f(&t)?);
        }
        Ok(sum * half)
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: Float,
    pub error_estimate: Float,
    pub panels: usize,
}

struct Panel {
    a: Float,
    b: Float,
    left: Float,
    right: Float,
    error: Float,
}

impl Panel {
    fn evaluate<F>(rule: &GaussLegendre, f: &F, a: Float, b: Float, whole: Float) -> Result<Self>
    where
        F: Fn(&Float) -> Result<Float>,
    {
        let mid = Float::with_val(rule.prec, &a + &b) / 2u32;
        let left = rule.integrate(f, &a, &mid)?;
        let right = rule.integrate(f, &mid, &b)?;
        let error = (Float::with_val(rule.prec, &left + &right) - whole).abs();
        Ok(Self {
            a,
            b,
            left,
            right,
            error,
        })
    }
}

/// Integrates `f` over consecutive `breakpoints`, bisecting the panel with
/// the largest error estimate until the summed estimate is at most
/// `tolerance`. A panel's estimate is the difference between the rule on the
/// whole panel and on its two halves; the halves' sum is the value kept.
pub fn adaptive<F>(
    f: &F,
    breakpoints: &[Float],
    tolerance: &Float,
    rule: &GaussLegendre,
    max_panels: usize,
) -> Result<QuadratureResult>
where
    F: Fn(&Float) -> Result<Float>,
{
    let mut panels = Vec::new();
    for w in breakpoints.windows(2) {
        let whole = rule.integrate(f, &w[0], &w[1])?;
        panels.push(Panel::evaluate(rule, f, w[0].clone(), w[1].clone(), whole)?);
    }
    loop {
        let total: Float = Float::with_val(rule.prec, Float::sum(panels.iter().map(|p| &p.error)));
        if total <= *tolerance || panels.len() >= max_panels {
            if total > *tolerance {
                return Err(Error::QuadratureTolerance {
                    estimate: total.to_f64(),
                    tolerance: tolerance.to_f64(),
                });
            }
            let value = Float::with_val(
                rule.prec,
                Float::sum(panels.iter().flat_map(|p| [&p.left, &p.right])),
            );
            return Ok(QuadratureResult {
                value,
                error_estimate: total,
                panels: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(Ordering::Equal))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = Float::with_val(rule.prec, &p.a + &p.b) / 2u32;
        panels.push(Panel::evaluate(rule, f, p.a, mid.clone(), p.left)?);
        panels.push(Panel::evaluate(rule, f, mid, p.b, p.right)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    const PREC: u32 = 200;

    fn fl(x: f64) -> Float {
        Float::with_val(PREC, x)
    }

    #[test]
    fn rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(10, PREC);
        // ∫_{-1}^{2} x^19 dx = (2^20 - 1)/20
        let v = rule
            .integrate(
                &|x: &Float| Ok(Float::with_val(PREC, x.pow(19u32))),
                &fl(-1.0),
                &fl(2.0),
            )
            .unwrap();
        let expected = Float::with_val(PREC, (1u64 << 20) - 1) / 20u32;
        assert!((v - expected).abs() < 1e-50);
        let wsum = Float::with_val(PREC, Float::sum(rule.weights.iter()));
        assert!((wsum - 2u32).abs() < 1e-55);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        // ∫_0^1 sqrt(x) ln(x) dx = -4/9
        let rule = GaussLegendre::new(20, PREC);
        let f = |x: &Float| -> Result<Float> {
            if x.is_zero() {
                return Ok(Float::new(PREC));
            }
            Ok(Float::with_val(PREC, x.sqrt_ref()) * Float::with_val(PREC, x.ln_ref()))
        };
        let tol = fl(1e-30);
        let r = adaptive(&f, &[fl(0.0), fl(1.0)], &tol, &rule, 5000).unwrap();
        let expected = Float::with_val(PREC, -4) / 9u32;
        assert!((r.value - expected).abs() < 1e-30);
        assert!(r.error_estimate <= tol);
    }

    #[test]
    fn adaptive_reports_unreachable_tolerance() {
        let rule = GaussLegendre::new(4, PREC);
        let f = |x: &Float| -> Result<Float> { Ok(Float::with_val(PREC, x.sqrt_ref())) };
        let r = adaptive(&f, &[fl(0.0), fl(1.0)], &fl(1e-40), &rule, 8);
        assert!(matches!(r, Err(Error::QuadratureTolerance { .. })));
    }
}
