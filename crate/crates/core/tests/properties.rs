use mhbl_core::coeffs::{eval_advection, eval_diffusion, eval_lower_order, eval_symmetrizer, Mat3, Vec3};
use mhbl_core::diagnostics::{discrete_norm, NormSpec};
use mhbl_core::fields::{make_grid, sample_outflow, validate_admissibility, Field, Grid, OutflowRecipe, Params, State};
use mhbl_core::io::{decode, encode, RunConfig, Snapshot};
use mhbl_core::stepper::{apply_bcs, step_linear, FrozenCoeffs};
use mhbl_core::transform::{stream_from_h1, PhysicalGrid};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = Params<f64>> {
    (0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64)
        .prop_map(|(mu, k, nu, r, cv)| Params::new(mu, k, nu, r, cv, 0.05).unwrap())
}

/// `(v, ∂η v, P)` with `θ ≥ δ`, `δ ≤ q ≤ P − δ`.
fn point() -> impl Strategy<Value = (Vec3<f64>, Vec3<f64>, f64)> {
    (0.5..5.0f64).prop_flat_map(|p| {
        (
            (-5.0..5.0f64, 0.05..5.0f64, 0.05..=p - 0.05).prop_map(|(u, t, q)| Vec3([u, t, q])),
            prop::array::uniform3(-5.0..5.0f64).prop_map(Vec3),
            Just(p),
        )
    })
}

fn rel(a: Mat3<f64>, b: Mat3<f64>) -> f64 {
    (a - b).max_abs() / a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE)
}

fn grid() -> Grid<f64> {
    make_grid(6, 12, 6.0, 0.01, 0.02).unwrap()
}

fn constant_outflow() -> OutflowRecipe {
    OutflowRecipe::Constant {
        u: 0.7,
        theta: 1.1,
        h: 1.2,
        p: 2.0,
        theta_star: 0.9,
    }
}

fn state(g: &Grid<f64>) -> impl Strategy<Value = State<f64>> {
    let n = g.nodes();
    let g = *g;
    (
        prop::collection::vec(-1.0..1.0f64, n),
        prop::collection::vec(0.2..2.0f64, n),
        prop::collection::vec(0.2..1.5f64, n),
    )
        .prop_map(move |(u, t, q)| {
            let f = |d: Vec<f64>| Field {
                nx: g.nx,
                n: g.neta,
                data: d,
            };
            State {
                u1: f(u),
                theta: f(t),
                q: f(q),
                time: 0.0,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn total_pressure_positive((v, _, p) in point(), par in params()) {
        prop_assert!(par.q_total(p, v[2]) > 0.0);
    }

    #[test]
    fn symmetrizer_structure((v, dv, p) in point(), par in params()) {
        let sym = eval_symmetrizer(v, dv, p, &par).unwrap();
        prop_assert!(sym.s.cholesky().is_some());
        let sa = sym.s * eval_advection(v, p, &par).unwrap();
        prop_assert!(sa.asymmetry() <= 1e-12 * sa.max_abs());
        let (th, q) = (v[1], v[2]);
        let expect = Mat3::diag(2.0 * par.mu * th * th * q, 2.0 * par.kappa * th * q, par.nu * th * th);
        prop_assert!(rel(sym.s * eval_diffusion(v, p, &par).unwrap(), expect) <= 1e-13);
    }

    #[test]
    fn lower_order_factorizes((v, dv, p) in point(), par in params(), pt in -2.0..2.0f64, px in -2.0..2.0f64) {
        let lo = eval_lower_order(v, dv, p, pt, px, &par).unwrap();
        let scale = lo.f_mat.max_abs() * dv.max_abs() * 3.0 + f64::MIN_POSITIVE;
        prop_assert!((lo.f - lo.f_mat * dv).max_abs() <= 1e-13 * scale);
        let scale = lo.g_mat.max_abs() * v.max_abs() * 3.0 + f64::MIN_POSITIVE;
        prop_assert!((lo.g - lo.g_mat * v).max_abs() <= 1e-13 * scale);
    }

    #[test]
    fn coefficients_are_continuous((v, _, p) in point(), par in params(), dir in prop::array::uniform3(-1.0..1.0f64)) {
        let h = 1e-7;
        let w = v + Vec3(dir).scale(h);
        prop_assume!(w[1] >= 0.05 && w[2] >= 0.05 && w[2] <= p - 0.05);
        for (a, b) in [
            (eval_advection(v, p, &par).unwrap(), eval_advection(w, p, &par).unwrap()),
            (eval_diffusion(v, p, &par).unwrap(), eval_diffusion(w, p, &par).unwrap()),
        ] {
            let d = (b - a).max_abs() / h;
            prop_assert!(d.is_finite() && d < 1e8);
        }
    }

    #[test]
    fn admissibility_check_is_pure(v in state(&grid())) {
        let g = grid();
        let out = sample_outflow(&constant_outflow(), &g).unwrap();
        let par = Params::unit(0.05);
        let before = v.clone();
        let a = validate_admissibility(&v, &out, &par);
        let b = validate_admissibility(&v, &out, &par);
        prop_assert_eq!(a, b);
        prop_assert_eq!(v, before);
    }

    #[test]
    fn bcs_are_idempotent(v in state(&grid())) {
        let g = grid();
        let out = sample_outflow(&constant_outflow(), &g).unwrap();
        let once = apply_bcs(&v, &out, &g);
        prop_assert_eq!(apply_bcs(&once, &out, &g), once);
    }

    #[test]
    fn step_is_affine(a in state(&grid()), b in state(&grid())) {
        let g = grid();
        let out = sample_outflow(&constant_outflow(), &g).unwrap();
        let m = |d: [f64; 3]| Mat3::diag(d[0], d[1], d[2]);
        let mut f = m([0.1, 0.2, -0.1]);
        f.0[1][2] = 0.05;
        let frozen = FrozenCoeffs::uniform(&g, m([0.5, 0.4, 0.3]), m([1.0, 0.5, 0.8]), f, m([0.1, 0.0, 0.2]));
        let zero = State::zeros(&g, 0.0);
        let sum = State {
            u1: a.u1.zip_map(&b.u1, |x, y| x + y),
            theta: a.theta.zip_map(&b.theta, |x, y| x + y),
            q: a.q.zip_map(&b.q, |x, y| x + y),
            time: 0.0,
        };
        let step = |v: &State<f64>| step_linear(v, &frozen, &out, &g, None).unwrap();
        let (sa, sb, s0, ss) = (step(&a), step(&b), step(&zero), step(&sum));
        for c in 0..3 {
            let lhs = ss.component(c);
            let rhs = sa.component(c).zip_map(sb.component(c), |x, y| x + y).zip_map(s0.component(c), |x, y| x - y);
            let err = lhs.zip_map(&rhs, |x, y| x - y).max_abs();
            prop_assert!(err <= 1e-12 * (1.0 + rhs.max_abs()), "component {} err {}", c, err);
        }
    }

    #[test]
    fn norm_is_homogeneous(v in state(&grid()), c in -3.0..3.0f64) {
        let g = grid();
        for k in 0..=2 {
            let spec = NormSpec::h(k);
            let a = discrete_norm(&v.u1.map(|x| c * x), spec, &g).unwrap();
            let b = c.abs() * discrete_norm(&v.u1, spec, &g).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        }
    }

    #[test]
    fn psi_increases_in_y(hs in prop::collection::vec(0.05..3.0f64, 6 * 12)) {
        let g = grid();
        let h1 = Field { nx: g.nx, n: g.neta, data: hs };
        let pg = PhysicalGrid::new(g.nx, 16, 1.0).unwrap();
        let s = stream_from_h1(&h1, &g, &pg, 0.05).unwrap();
        for i in 0..g.nx {
            let col = s.psi.column(i);
            prop_assert!(col.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact(v in state(&grid()), t in any::<f64>()) {
        let snap = Snapshot::Transformed(State { time: t, ..v });
        let back = decode(&encode(&snap)).unwrap();
        prop_assert_eq!(encode(&back), encode(&snap));
    }

    #[test]
    fn config_serialization_is_idempotent(mu in 0.1..10.0f64, nx in 4usize..64, tol in 1e-14..1e-4f64) {
        let text = format!(
            "[physics]\nmu = {mu}\nkappa = 1\nnu = 1\nR = 1\ncV = 1\ndelta = 0.05\n\
             [grid]\nnx = {nx}\nneta = 16\neta_max = 6\ndt = 0.01\nt_end = 0.02\n\
             [outflow]\nmode = expr\nU = 1 + 0.1*sin(x)\nTheta = 1\nH = 1\nP = 2\ntheta_star = 1\n\
             [initial]\nu10 = tanh(y)\ntheta0 = 1\nh10 = 1\nny = 32\ny_max = 7\n\
             [picard]\ntol = {tol}\n"
        );
        let c = RunConfig::parse(&text).unwrap();
        let once = c.to_ini_string();
        let again = RunConfig::parse(&once).unwrap();
        prop_assert_eq!(&c, &again);
        prop_assert_eq!(once, again.to_ini_string());
    }
}

#[test]
fn constant_outflow_has_zero_pressure_derivatives() {
    let g = grid();
    let out = sample_outflow(&constant_outflow(), &g).unwrap();
    assert!(out.points().iter().all(|p| p.p_t == 0.0 && p.p_xi == 0.0));
}
