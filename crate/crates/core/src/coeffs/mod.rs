//! Pointwise coefficients of the reduced quasilinear system
//!
//! ```text
//! ∂τ v + A(v) ∂ξ v + f(v, ∂η v) + g(v) = B(v) ∂η² v,   v = (u1, θ, q)
//! ```
//!
//! together with the symmetrizer `S(v)`. Every function here evaluates a single
//! node, so the algebraic identities between the matrices can be checked pointwise.

mod mat;

pub use mat::{Mat3, Vec3};

use crate::error::{Error, Result};
use crate::fields::Params;
use crate::scalar::Real;

fn guard<T: Real>(quantity: &'static str, value: T) -> Result<T> {
    if !(value >= T::degeneracy_floor()) {
        return Err(Error::Degenerate {
            quantity,
            value: value.as_f64(),
        });
    }
    Ok(value)
}

/// The two denominators `P - q` and `Q = P + (1 - 2a) q`, both guarded.
fn denominators<T: Real>(q: T, p: T, params: &Params<T>) -> Result<(T, T)> {
    let pmq = guard("P - q", p - q)?;
    let qt = guard("Q", params.q_total(p, q))?;
    Ok((pmq, qt))
}

/// Advection matrix `A(v)`; every diagonal entry equals `u1`.
pub fn eval_advection<T: Real>(v: Vec3<T>, p: T, params: &Params<T>) -> Result<Mat3<T>> {
    let [u1, theta, q] = v.0;
    let (pmq, qt) = denominators(q, p, params)?;
    let two = T::lit(2.0);
    let z = T::zero();
    Ok(Mat3([
        [u1, z, -params.r_gas * theta / pmq],
        [two * params.a * theta * q / qt, u1, z],
        [-two * pmq * q / qt, z, u1],
    ]))
}

/// Spectral radius of `A(v)`: its eigenvalues are `u1` and `u1 ± sqrt(2Rθq/Q)`.
pub fn advection_speed<T: Real>(v: Vec3<T>, p: T, params: &Params<T>) -> Result<T> {
    let [u1, theta, q] = v.0;
    let (_, qt) = denominators(q, p, params)?;
    let c2 = T::lit(2.0) * params.r_gas * theta * q / qt;
    Ok(u1.abs() + c2.max(T::zero()).sqrt())
}

/// Diffusion matrix `B(v)`, block structured `(1) ⊕ (2×2)`.
pub fn eval_diffusion<T: Real>(v: Vec3<T>, p: T, params: &Params<T>) -> Result<Mat3<T>> {
    let [_, theta, q] = v.0;
    guard("q", q)?;
    let (pmq, qt) = denominators(q, p, params)?;
    let Params {
        mu,
        kappa,
        nu,
        r_gas,
        a,
        ..
    } = *params;
    let two_q = T::lit(2.0) * q;
    let z = T::zero();
    Ok(Mat3([
        [two_q * mu * r_gas * theta / pmq, z, z],
        [
            z,
            two_q * kappa * a * theta * (p + q) / (qt * pmq),
            -two_q * nu * a * theta / qt,
        ],
        [z, -two_q * T::lit(2.0) * kappa * a * q / qt, two_q * nu * pmq / qt],
    ]))
}

/// Lower-order terms: the quadratic vector `f` and source `g`, with their
/// matrix factorizations `f = F ∂η v` and `g = G v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerOrder<T> {
    pub f: Vec3<T>,
    pub f_mat: Mat3<T>,
    pub g: Vec3<T>,
    pub g_mat: Mat3<T>,
}

pub fn eval_lower_order<T: Real>(
    v: Vec3<T>,
    dv_deta: Vec3<T>,
    p: T,
    p_t: T,
    p_xi: T,
    params: &Params<T>,
) -> Result<LowerOrder<T>> {
    let [u1, theta, q] = v.0;
    let [du, dth, dq] = dv_deta.0;
    let (pmq, qt) = denominators(q, p, params)?;
    let Params {
        mu,
        kappa,
        nu,
        r_gas,
        a,
        ..
    } = *params;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let z = T::zero();
    let one_minus_a = T::one() - a;
    // shared factor aθ(P+q) / (Q(P-q))
    let heat = a * theta * (p + q) / (qt * pmq);
    let drift = p_t + p_xi * u1;

    let f = Vec3([
        (nu - mu * r_gas * theta / pmq) * dq * du,
        nu * dq * dth - heat * (two * mu * q * du * du + kappa * dq * dth + nu * dq * dq),
        a / qt * (four * mu * q * q * du * du + two * kappa * q * dq * dth + nu * (p + q) / a * dq * dq),
    ]);
    let f_mat = Mat3([
        [(nu - mu * r_gas * theta / pmq) * dq, z, z],
        [-two * mu * q * heat * du, -kappa * heat * dq, nu * dth - nu * heat * dq],
        [
            four * mu * a * q * q / qt * du,
            two * kappa * a * q / qt * dq,
            nu * (p + q) / qt * dq,
        ],
    ]);
    let g = Vec3([
        r_gas * p_xi * theta / pmq,
        -a * drift * theta / qt,
        -two * one_minus_a * drift * q / qt,
    ]);
    let g_mat = Mat3([
        [z, r_gas * p_xi / pmq, z],
        [z, -a * drift / qt, z],
        [z, z, -two * one_minus_a * drift / qt],
    ]);
    Ok(LowerOrder { f, f_mat, g, g_mat })
}

/// Symmetrizer `S(v)` and the closed forms of `S A`, `S B`, `S F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Symmetrized<T> {
    pub s: Mat3<T>,
    pub sa: Mat3<T>,
    pub sb: Mat3<T>,
    pub sf: Mat3<T>,
}

/// The symmetrizer, normalized so that `S B = diag(2μθ²q, 2κθq, νθ²)`.
pub fn symmetrizer_matrix<T: Real>(v: Vec3<T>, p: T, params: &Params<T>) -> Result<Mat3<T>> {
    let [_, theta, q] = v.0;
    guard("theta", theta)?;
    guard("q", q)?;
    let (pmq, _) = denominators(q, p, params)?;
    let z = T::zero();
    Ok(Mat3([
        [theta * pmq / params.r_gas, z, z],
        [z, pmq / params.a, theta],
        [z, theta, theta * theta * (p + q) / (T::lit(2.0) * q * pmq)],
    ]))
}

pub fn eval_symmetrizer<T: Real>(v: Vec3<T>, dv_deta: Vec3<T>, p: T, params: &Params<T>) -> Result<Symmetrized<T>> {
    let s = symmetrizer_matrix(v, p, params)?;
    let [u1, theta, q] = v.0;
    let [du, dth, dq] = dv_deta.0;
    let pmq = p - q;
    let Params {
        mu,
        kappa,
        nu,
        r_gas,
        a,
        ..
    } = *params;
    let two = T::lit(2.0);
    let z = T::zero();
    let s33 = s[(2, 2)];
    let sa = Mat3([
        [theta * pmq / r_gas * u1, z, -theta * theta],
        [z, pmq / a * u1, theta * u1],
        [-theta * theta, theta * u1, s33 * u1],
    ]);
    let sb = Mat3::diag(
        two * mu * theta * theta * q,
        two * kappa * theta * q,
        nu * theta * theta,
    );
    let sf = Mat3([
        [theta * (nu * pmq / r_gas - mu * theta) * dq, z, z],
        [-two * mu * theta * q * du, -kappa * theta * dq, nu * pmq / a * dth],
        [z, z, nu * (theta * dth + s33 * dq)],
    ]);
    Ok(Symmetrized { s, sa, sb, sf })
}

/// Smallest eigenvalue of a symmetrizer, which is block diagonal `(1) ⊕ (2×2)`.
pub fn symmetrizer_min_eigenvalue<T: Real>(s: &Mat3<T>) -> T {
    let (b, c, d) = (s[(1, 1)], s[(1, 2)], s[(2, 2)]);
    let half_tr = (b + d) / T::lit(2.0);
    let disc = (((b - d) / T::lit(2.0)).powi(2) + c * c).sqrt();
    s[(0, 0)].min(half_tr - disc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Params<f64> {
        // μ = κ = ν = R = 1, c_V = 1 gives a = 1/2
        Params::unit(0.05)
    }

    #[test]
    fn advection_substitution() {
        let a = eval_advection(Vec3::new(0.0, 1.0, 0.5), 1.0, &unit()).unwrap();
        let expected = Mat3([[0.0, 0.0, -2.0], [0.5, 0.0, 0.0], [-0.5, 0.0, 0.0]]);
        assert!(a.rel_diff(expected) < 1e-15);
    }

    #[test]
    fn advection_diagonal_is_u1() {
        let a = eval_advection(Vec3::new(0.7, 1.0, 0.05), 1.0, &unit()).unwrap();
        assert_eq!([a[(0, 0)], a[(1, 1)], a[(2, 2)]], [0.7, 0.7, 0.7]);
    }

    #[test]
    fn advection_degenerate() {
        let r = eval_advection(Vec3::new(0.0, 1.0, 1.0), 1.0, &unit());
        assert!(matches!(r, Err(Error::Degenerate { quantity: "P - q", .. })));
    }

    #[test]
    fn diffusion_substitution() {
        // 2q = 1, P - q = 1/2, Q = 1, a = 1/2
        let b = eval_diffusion(Vec3::new(0.0, 1.0, 0.5), 1.0, &unit()).unwrap();
        let expected = Mat3([[2.0, 0.0, 0.0], [0.0, 1.5, -0.5], [0.0, -0.5, 0.5]]);
        assert!(b.rel_diff(expected) < 1e-15);
    }

    #[test]
    fn diffusion_sign_and_homogeneity() {
        let delta = 0.05;
        let b = eval_diffusion(Vec3::new(0.0, 1.0, delta), 1.0, &unit()).unwrap();
        assert!((b[(0, 0)] - 2.0 * delta / (1.0 - delta)).abs() < 1e-15);
        assert!(b[(0, 0)] > 0.0);
        let v = Vec3::new(0.3, 1.2, 0.4);
        let b1 = eval_diffusion(v, 1.3, &unit()).unwrap();
        let b2 = eval_diffusion(v, 1.3, &unit().with_scaled_diffusivities(2.0)).unwrap();
        assert!(b2.rel_diff(b1.scale(2.0)) < 1e-15);
        assert!(eval_diffusion(Vec3::new(0.0, 1.0, 0.0), 1.0, &unit()).is_err());
    }

    #[test]
    fn lower_order_zero_gradient_and_steady_pressure() {
        let lo = eval_lower_order(Vec3::new(0.2, 1.0, 0.5), Vec3::zero(), 1.0, 0.3, -0.2, &unit()).unwrap();
        assert_eq!(lo.f, Vec3::zero());
        assert_eq!(lo.f_mat * Vec3::zero(), Vec3::zero());
        let lo = eval_lower_order(
            Vec3::new(0.2, 1.0, 0.5),
            Vec3::new(1.0, 2.0, 3.0),
            1.0,
            0.0,
            0.0,
            &unit(),
        )
        .unwrap();
        assert_eq!(lo.g, Vec3::zero());
        assert_eq!(lo.g_mat, Mat3::zero());
    }

    #[test]
    fn lower_order_hand_substitution() {
        // v = (0, 1, 1/2), ∂ηv = (1, 1, 1), P = 1, unit parameters:
        // P - q = 1/2, Q = 1, aθ(P+q)/(Q(P-q)) = 3/2
        let lo = eval_lower_order(
            Vec3::new(0.0, 1.0, 0.5),
            Vec3::new(1.0, 1.0, 1.0),
            1.0,
            0.0,
            0.0,
            &unit(),
        )
        .unwrap();
        let f1 = 1.0 - 2.0; // (ν - μRθ/(P-q)) ∂q ∂u
        let f2 = 1.0 - 1.5 * (2.0 * 0.5 + 1.0 + 1.0);
        let f3 = 0.5 * (4.0 * 0.25 + 2.0 * 0.5 + 1.5 / 0.5);
        let expected = Vec3::new(f1, f2, f3);
        assert!((lo.f - expected).max_abs() < 1e-14);
        assert!((lo.f_mat * Vec3::new(1.0, 1.0, 1.0) - expected).max_abs() < 1e-14);
    }

    #[test]
    fn symmetrizer_substitution() {
        let s = symmetrizer_matrix(Vec3::new(0.0, 1.0, 0.5), 1.0, &unit()).unwrap();
        // S33 = θ²(P+q)/(2q(P-q)) = 1.5 / 0.5
        let expected = Mat3([[0.5, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 3.0]]);
        assert!(s.rel_diff(expected) < 1e-15);
        assert!(s.cholesky().is_some());
        // lower block [[1, 1], [1, 3]] has eigenvalue 2 - √2 > S11
        assert!((symmetrizer_min_eigenvalue(&s) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn symmetrized_diffusion_is_unit_at_reference() {
        let sym = eval_symmetrizer(Vec3::new(0.0, 1.0, 0.5), Vec3::zero(), 1.0, &unit()).unwrap();
        assert_eq!(sym.sb, Mat3::identity());
    }

    #[test]
    fn advection_speed_is_spectral_radius() {
        let p = unit();
        let v = Vec3::new(-0.4, 1.3, 0.6);
        let a = eval_advection(v, 1.7, &p).unwrap();
        let c = advection_speed(v, 1.7, &p).unwrap();
        // (A - λI) is singular at λ = u1 ± (c - |u1|)
        let w = c - 0.4;
        for lam in [-0.4 + w, -0.4 - w] {
            let shifted = a - Mat3::identity().scale(lam);
            assert!(shifted.det().abs() < 1e-12);
        }
    }
}
