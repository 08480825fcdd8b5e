//! Reconstruction checked against a monomial-basis oracle: the Legendre
//! series is expanded into powers of `x` by exact polynomial arithmetic, then
//! integrated and evaluated directly.

use hsdet::moments::moment_table;
use hsdet::reconstruct::{legendre_coefficients_exact, DensityEstimate};
use hsdet::{ExactRational, HalfIntegerAlpha, MomentFamily, Support};

type Poly = Vec<ExactRational>;

fn q(n: i64, d: i64) -> ExactRational {
    ExactRational::frac(n, d)
}

fn mul(p: &Poly, r: &Poly) -> Poly {
    let mut out = vec![ExactRational::zero(); p.len() + r.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in r.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn axpy(alpha: &ExactRational, p: &Poly, beta: &ExactRational, r: &Poly) -> Poly {
    let n = p.len().max(r.len());
    (0..n)
        .map(|i| {
            let mut v = ExactRational::zero();
            if let Some(x) = p.get(i) {
                v += alpha * x;
            }
            if let Some(x) = r.get(i) {
                v += beta * x;
            }
            v
        })
        .collect()
}

/// `Σ λ_j P_j(u(x))` as monomial coefficients in `x`.
fn monomial_density(lambdas: &[ExactRational], support: &Support) -> Poly {
    let width = support.width();
    // u(x) = (2x - a - b) / (b - a)
    let u: Poly = vec![
        -(support.lower() + support.upper()) / width.clone(),
        q(2, 1) / width.clone(),
    ];
    let mut p_prev: Poly = vec![ExactRational::one()];
    let mut p: Poly = u.clone();
    let mut total = axpy(&lambdas[0], &p_prev, &ExactRational::zero(), &p_prev);
    for (j, lambda) in lambdas.iter().enumerate().skip(1) {
        total = axpy(&ExactRational::one(), &total, lambda, &p);
        // (j+1) P_{j+1} = (2j+1) u P_j - j P_{j-1}
        let jj = j as i64;
        let next = axpy(
            &q(2 * jj + 1, jj + 1),
            &mul(&u, &p),
            &q(-jj, jj + 1),
            &p_prev,
        );
        p_prev = std::mem::replace(&mut p, next);
    }
    total
}

fn raw_moment(poly: &Poly, support: &Support, k: usize) -> ExactRational {
    poly.iter()
        .enumerate()
        .map(|(i, c)| {
            let e = (i + k + 1) as i32;
            let span = support.upper().pow(e).unwrap() - support.lower().pow(e).unwrap();
            c * &span / ExactRational::from_integer(e as i64)
        })
        .sum()
}

fn cases() -> Vec<(MomentFamily, HalfIntegerAlpha)> {
    let mut out = Vec::new();
    for family in [MomentFamily::Balanced, MomentFamily::Unbalanced] {
        for two in [1, 2, 4, 7] {
            out.push((family, HalfIntegerAlpha::new(two).unwrap()));
        }
    }
    out.push((MomentFamily::RhoDet, HalfIntegerAlpha::REBIT));
    out
}

#[test]
fn expansion_reproduces_input_moments_exactly() {
    for (family, alpha) in cases() {
        let moments = moment_table(family, alpha, 50).unwrap();
        for degree in [0usize, 1, 7, 24, 50] {
            let expansion = legendre_coefficients_exact(&moments, degree).unwrap();
            let poly = monomial_density(expansion.exact().unwrap(), &moments.support);
            for k in 0..=degree {
                assert_eq!(
                    raw_moment(&poly, &moments.support, k),
                    moments.values[k],
                    "{family} α={alpha} N={degree} k={k}"
                );
            }
        }
    }
}

#[test]
fn clenshaw_matches_monomial_evaluation() {
    let digits = 100;
    for (family, alpha) in cases() {
        let moments = moment_table(family, alpha, 30).unwrap();
        for degree in [5usize, 30] {
            let expansion = legendre_coefficients_exact(&moments, degree).unwrap();
            let poly = monomial_density(expansion.exact().unwrap(), &moments.support);
            let est = DensityEstimate::new(expansion, digits);
            let support = &moments.support;
            let peak = poly
                .iter()
                .map(|c| c.abs().to_f64())
                .fold(0.0, f64::max)
                .max(1.0);
            for i in 0..=20 {
                let x = support.lower() + &(support.width() * q(i, 20));
                let exact: ExactRational = poly
                    .iter()
                    .enumerate()
                    .map(|(p, c)| c * &x.pow(p as i32).unwrap())
                    .sum();
                let got = est.density(&x.to_float(est.precision_bits())).unwrap();
                let diff = (got - exact.to_float(est.precision_bits())).abs().to_f64();
                // values scale like max|λ|, bounded well below the coefficient peak
                assert!(
                    diff < 1e-80 * peak.max(1.0),
                    "{family} α={alpha} N={degree} i={i} diff={diff:e}"
                );
            }
        }
    }
}
