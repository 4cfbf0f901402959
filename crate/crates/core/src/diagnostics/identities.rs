//! Randomized check of the algebraic identities between the coefficient matrices.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeffs::{eval_advection, eval_diffusion, eval_lower_order, eval_symmetrizer, Mat3, Vec3};
use crate::error::Result;
use crate::fields::Params;
use crate::scalar::Real;

/// Largest relative defects over all samples, one field per identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityReport<T> {
    pub samples: usize,
    pub cholesky_failures: usize,
    pub s_asymmetry: T,
    pub sa_asymmetry: T,
    pub sa_closed_form: T,
    pub sb_closed_form: T,
    pub sf_closed_form: T,
    pub f_factorization: T,
    pub g_factorization: T,
}

impl<T: Real> IdentityReport<T> {
    pub fn rows(&self) -> [(&'static str, T); 7] {
        [
            ("S symmetric", self.s_asymmetry),
            ("S A symmetric", self.sa_asymmetry),
            ("S A closed form", self.sa_closed_form),
            (
                "S B = diag(2 mu theta^2 q, 2 kappa theta q, nu theta^2)",
                self.sb_closed_form,
            ),
            ("S F closed form", self.sf_closed_form),
            ("f = F d_eta v", self.f_factorization),
            ("g = G v", self.g_factorization),
        ]
    }

    pub fn worst(&self) -> T {
        self.rows().iter().map(|r| r.1).fold(T::zero(), T::max)
    }

    pub fn passes(&self, tol: T) -> bool {
        self.cholesky_failures == 0 && self.worst() <= tol
    }
}

/// `max_ij Σ_k |x_ik| |y_kj|`, the natural scale of the entries of `x y`.
fn product_scale<T: Real>(x: &Mat3<T>, y: &Mat3<T>) -> T {
    let mut m = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let s = (0..3).map(|k| x[(i, k)].abs() * y[(k, j)].abs()).sum::<T>();
            m = m.max(s);
        }
    }
    m.max(T::min_positive_value())
}

fn vec_scale<T: Real>(x: &Mat3<T>, v: Vec3<T>) -> T {
    (0..3)
        .map(|i| (0..3).map(|k| x[(i, k)].abs() * v[k].abs()).sum::<T>())
        .fold(T::min_positive_value(), T::max)
}

/// Draws `samples` random admissible points and measures every identity.
///
/// Ranges: parameters in `[0.1, 10]`, `δ = 0.05`, `P ∈ [0.5, 5]`, `θ ∈ [δ, 5]`,
/// `q ∈ [δ, P − δ]`, `u1` and `∂η v` in `[−5, 5]`, `P_τ, P_ξ ∈ [−2, 2]`.
pub fn identity_suite<T: Real>(samples: usize, seed: u64) -> Result<IdentityReport<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = 0.05;
    let mut rep = IdentityReport {
        samples,
        cholesky_failures: 0,
        s_asymmetry: T::zero(),
        sa_asymmetry: T::zero(),
        sa_closed_form: T::zero(),
        sb_closed_form: T::zero(),
        sf_closed_form: T::zero(),
        f_factorization: T::zero(),
        g_factorization: T::zero(),
    };
    let l = T::lit;
    for _ in 0..samples {
        let mut par = || l(rng.random_range(0.1..=10.0));
        let params = Params::new(par(), par(), par(), par(), par(), l(delta))?;
        let p: f64 = rng.random_range(0.5..=5.0);
        let v = Vec3([
            l(rng.random_range(-5.0..=5.0)),
            l(rng.random_range(delta..=5.0)),
            l(rng.random_range(delta..=p - delta)),
        ]);
        let dv = Vec3([(); 3].map(|_| l(rng.random_range(-5.0..=5.0))));
        let (p_t, p_xi) = (l(rng.random_range(-2.0..=2.0)), l(rng.random_range(-2.0..=2.0)));
        let p = l(p);

        let a = eval_advection(v, p, &params)?;
        let b = eval_diffusion(v, p, &params)?;
        let lo = eval_lower_order(v, dv, p, p_t, p_xi, &params)?;
        let sym = eval_symmetrizer(v, dv, p, &params)?;
        let s = sym.s;

        if s.cholesky().is_none() {
            rep.cholesky_failures += 1;
        }
        let max = |x: &mut T, y: T| *x = x.max(y);
        max(&mut rep.s_asymmetry, s.asymmetry() / s.max_abs());
        let sa = s * a;
        let sa_scale = product_scale(&s, &a);
        max(&mut rep.sa_asymmetry, sa.asymmetry() / sa_scale);
        max(&mut rep.sa_closed_form, (sa - sym.sa).max_abs() / sa_scale);
        max(
            &mut rep.sb_closed_form,
            (s * b - sym.sb).max_abs() / product_scale(&s, &b),
        );
        max(
            &mut rep.sf_closed_form,
            (s * lo.f_mat - sym.sf).max_abs() / product_scale(&s, &lo.f_mat),
        );
        max(
            &mut rep.f_factorization,
            (lo.f - lo.f_mat * dv).max_abs() / vec_scale(&lo.f_mat, dv),
        );
        max(
            &mut rep.g_factorization,
            (lo.g - lo.g_mat * v).max_abs() / vec_scale(&lo.g_mat, v),
        );
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let rep = identity_suite::<f64>(500, 7).unwrap();
        assert!(rep.passes(1e-13), "{rep:?}");
    }
}
