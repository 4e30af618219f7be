//! Finite-difference operators and trapezoid quadrature on uniform grids
//! over `[0, 1]`.
//!
//! The slice kernels take node values `f_0..f_N` with `h = 1/N`; the
//! [`Field`] wrappers add the boundary-tag checks.

use crate::plants::{BoundaryTag, Field};

use super::NumericsError;

/// Composite trapezoid rule of `f(i)` over nodes `0..=n`.
#[inline]
pub fn trapz_by(n: usize, h: f64, f: impl Fn(usize) -> f64) -> f64 {
    let mut s = 0.5 * (f(0) + f(n));
    for i in 1..n {
        s += f(i);
    }
    s * h
}

#[inline]
pub fn trapz(values: &[f64], h: f64) -> f64 {
    trapz_by(values.len() - 1, h, |i| values[i])
}

/// `∫ f²` by the trapezoid rule.
#[inline]
pub fn l2_sq(values: &[f64], h: f64) -> f64 {
    trapz_by(values.len() - 1, h, |i| values[i] * values[i])
}

/// Second-order nodal derivative: central differences inside, one-sided
/// three-point formulas at the two ends.
pub fn gradient_into(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len() - 1;
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    out[n] = (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * h);
    for i in 1..n {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
}

/// `‖f_x‖²` from cell differences, `Σ (f_{i+1} - f_i)²/h`. For Dirichlet
/// data this equals `-⟨f, Δ_h f⟩` exactly (summation by parts).
pub fn grad_l2_sq(values: &[f64], h: f64) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum::<f64>() / h
}

/// Adds `scale · (f_{i-1} - 2 f_i + f_{i+1}) / h²` to the interior of `out`.
#[inline]
pub fn add_laplacian(values: &[f64], h: f64, scale: f64, out: &mut [f64]) {
    let n = values.len() - 1;
    let c = scale / (h * h);
    for i in 1..n {
        out[i] += c * (values[i - 1] - 2.0 * values[i] + values[i + 1]);
    }
}

/// Dirichlet Laplacian: interior central differences, endpoints 0.
pub fn laplacian_dirichlet(f: &Field) -> Result<Field, NumericsError> {
    if f.tag() != BoundaryTag::DirichletBoth {
        return Err(NumericsError::WrongBoundary {
            op: "laplacian_dirichlet",
            expected: BoundaryTag::DirichletBoth,
            got: f.tag(),
        });
    }
    let mut out = vec![0.0; f.values().len()];
    add_laplacian(f.values(), f.h(), 1.0, &mut out);
    Ok(Field::from_raw(out, BoundaryTag::DirichletBoth))
}

/// Backward (upwind for positive speed) difference; node 0 is 0 because
/// it is set by boundary injection.
pub fn upwind_dx(f: &Field) -> Result<Field, NumericsError> {
    if f.tag() != BoundaryTag::InflowLeft {
        return Err(NumericsError::WrongBoundary {
            op: "upwind_dx",
            expected: BoundaryTag::InflowLeft,
            got: f.tag(),
        });
    }
    let v = f.values();
    let h = f.h();
    let mut out = vec![0.0; v.len()];
    for i in 1..v.len() {
        out[i] = (v[i] - v[i - 1]) / h;
    }
    Ok(Field::from_raw(out, BoundaryTag::Free))
}

/// Trapezoid approximation of `∫₀¹ f²`.
pub fn l2_norm_sq(f: &Field) -> f64 {
    l2_sq(f.values(), f.h())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dirichlet(n: usize, f: impl Fn(f64) -> f64) -> Field {
        Field::from_fn(n, BoundaryTag::DirichletBoth, f)
    }

    #[test]
    fn laplacian_of_zero_and_quadratic() {
        let z = laplacian_dirichlet(&dirichlet(16, |_| 0.0)).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let q = laplacian_dirichlet(&dirichlet(64, |x| x * (1.0 - x))).unwrap();
        let v = q.values();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[64], 0.0);
        for &x in &v[1..64] {
            assert!((x + 2.0).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn laplacian_of_sine_is_second_order() {
        let err = |n: usize| {
            let f = dirichlet(n, |x| (PI * x).sin());
            let l = laplacian_dirichlet(&f).unwrap();
            (1..n)
                .map(|i| {
                    let x = i as f64 / n as f64;
                    (l.values()[i] + PI * PI * (PI * x).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(50) / err(100);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn wrong_tag_is_rejected() {
        let f = Field::from_fn(10, BoundaryTag::InflowLeft, |x| x);
        assert!(laplacian_dirichlet(&f).is_err());
        let g = dirichlet(10, |x| x * (1.0 - x));
        assert!(upwind_dx(&g).is_err());
    }

    #[test]
    fn upwind_exact_on_linear() {
        let c = upwind_dx(&Field::from_fn(20, BoundaryTag::InflowLeft, |_| 3.0)).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
        let l = upwind_dx(&Field::from_fn(20, BoundaryTag::InflowLeft, |x| x)).unwrap();
        for &v in &l.values()[1..] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn upwind_is_first_order() {
        let err = |n: usize| {
            let f = Field::from_fn(n, BoundaryTag::InflowLeft, f64::exp);
            let d = upwind_dx(&f).unwrap();
            (1..=n)
                .map(|i| (d.values()[i] - (i as f64 / n as f64).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(100) / err(200);
        assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn trapezoid_norms() {
        assert_eq!(l2_norm_sq(&dirichlet(100, |_| 0.0)), 0.0);
        let one = Field::from_fn(100, BoundaryTag::Free, |_| 1.0);
        assert!((l2_norm_sq(&one) - 1.0).abs() < 1e-14);
        let s = dirichlet(100, |x| (PI * x).sin());
        assert!((l2_norm_sq(&s) - 0.5).abs() < 1e-4);
    }

    #[test]
    fn gradient_second_order_at_ends() {
        let v: Vec<f64> = (0..=40).map(|i| (i as f64 / 40.0).powi(2)).collect();
        let mut g = vec![0.0; 41];
        gradient_into(&v, 1.0 / 40.0, &mut g);
        for (i, gi) in g.iter().enumerate() {
            assert!((gi - 2.0 * i as f64 / 40.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_norm_is_laplacian_energy() {
        let f = dirichlet(50, |x| x * (1.0 - x) * (3.0 * x).cos());
        let h = 1.0 / 50.0;
        let mut lap = vec![0.0; 51];
        add_laplacian(f.values(), h, 1.0, &mut lap);
        let energy = -trapz_by(50, h, |i| f.values()[i] * lap[i]);
        assert!((grad_l2_sq(f.values(), h) - energy).abs() < 1e-12);
        let s = dirichlet(100, |x| (PI * x).sin());
        assert!((grad_l2_sq(s.values(), 0.01) - PI * PI / 2.0).abs() < 1e-3);
    }
}
