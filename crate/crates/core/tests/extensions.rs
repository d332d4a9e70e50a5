mod common;

use std::f64::consts::PI;

use tlab::extensions::{frac_lift_subordination, gradient_bound, modulus_bound_check};
use tlab::grid::{Field, TorusGrid};
use tlab::{ExtensionStack, SemigroupKind, TimeMesh};

fn smooth(g: TorusGrid) -> Field {
    Field::from_fn(g, |x| {
        (2.0 * PI * (x[0] + 2.0 * x[1])).cos() + 0.5 * (2.0 * PI * 5.0 * x[0] + 0.4).sin() - 0.25 * (2.0 * PI * 3.0 * x[1]).cos()
    })
    .unwrap()
}

#[test]
fn poisson_extension_of_a_mode_decays_exponentially() {
    let g = TorusGrid::new(1, 64, 2.0).unwrap();
    let k = 3.0;
    let f = Field::from_fn(g, |x| (2.0 * PI * k * x[0] / 2.0).cos()).unwrap();
    let stack = ExtensionStack::build(&f, SemigroupKind::Poisson, &TimeMesh::with_defaults(1.0).unwrap()).unwrap();
    let w = 2.0 * PI * k / 2.0;
    for node in stack.nodes().iter().step_by(13) {
        let decay = (-w * node.t).exp();
        let err = node.values.iter().zip(f.samples()).map(|(u, c)| (u - decay * c).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "t = {}", node.t);
        let dt_err = node.grad_t.iter().zip(f.samples()).map(|(u, c)| (u + w * decay * c).abs()).fold(0.0, f64::max);
        assert!(dt_err <= 1e-11 * w);
    }
}

#[test]
fn time_gradients_match_central_differences() {
    let g = TorusGrid::unit(2, 16).unwrap();
    let f = smooth(g);
    for kind in [SemigroupKind::Poisson, SemigroupKind::Heat] {
        let top = if kind == SemigroupKind::Poisson { 0.5 } else { 0.25 };
        let stack = ExtensionStack::build(&f, kind, &TimeMesh::with_defaults(top).unwrap()).unwrap();
        let nodes = stack.nodes();
        // Interior nodes where the extension has not decayed into roundoff.
        let interior: Vec<usize> = (1..nodes.len() - 1).filter(|&q| nodes[q].t > 1e-3 * top && nodes[q].t < 0.05 * top).collect();
        assert!(interior.len() > 10);
        for q in interior.into_iter().step_by(5) {
            let t = nodes[q].t;
            let h = 1e-4 * t;
            for p in [0usize, 37, 200] {
                let fd = (stack.evaluate_point(p, t + h).value - stack.evaluate_point(p, t - h).value) / (2.0 * h);
                let exact = nodes[q].grad_t[p];
                let scale = nodes[q].grad_t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!((fd - exact).abs() <= 1e-6 * scale, "{kind:?} t={t} p={p}: {fd} vs {exact}");
            }
        }
    }
}

#[test]
fn extensions_solve_their_equations() {
    let g = TorusGrid::unit(2, 32).unwrap();
    let f = common::white_noise(g, 4);
    let poisson = ExtensionStack::build(&f, SemigroupKind::Poisson, &TimeMesh::with_defaults(0.5).unwrap()).unwrap();
    assert!(poisson.pde_residual() <= 1e-8);
    let heat = ExtensionStack::build(&f, SemigroupKind::Heat, &TimeMesh::with_defaults(0.25).unwrap()).unwrap();
    assert!(heat.pde_residual() <= 1e-8);
}

#[test]
fn point_evaluation_agrees_with_node_synthesis() {
    let g = TorusGrid::unit(2, 16).unwrap();
    let f = smooth(g);
    let stack = ExtensionStack::build(&f, SemigroupKind::Heat, &TimeMesh::with_defaults(0.25).unwrap()).unwrap();
    let q = stack.nodes().len() / 3;
    let node = stack.node(q);
    for p in [0usize, 17, 255] {
        let pv = stack.evaluate_point(p, node.t);
        assert!((pv.value - node.values[p]).abs() < 1e-12);
        assert!((pv.grad_x[0] - node.grad_x[0][p]).abs() < 1e-10);
        assert!((pv.grad_x[1] - node.grad_x[1][p]).abs() < 1e-10);
    }
}

#[test]
fn subordination_matches_spectral_lift() {
    let g = TorusGrid::unit(1, 128).unwrap();
    let f = common::white_noise(g, 8);
    let stack = ExtensionStack::build(&f, SemigroupKind::Poisson, &TimeMesh::new(0.5, 12, 6).unwrap()).unwrap();
    for alpha in [0.25, 0.5, 0.75] {
        let spectral = stack.spectral_lift(alpha).unwrap();
        let sub = frac_lift_subordination(&stack, alpha, 3.0).unwrap();
        let tail = match sub.lift() {
            tlab::extensions::Lift::Subordination { tail_bound, .. } => tail_bound,
            other => panic!("unexpected lift {other:?}"),
        };
        let scale = spectral.base().values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in spectral.nodes().iter().zip(sub.nodes()).step_by(5) {
            let err = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err <= tail + 1e-9 * scale, "alpha {alpha} t {}: {err} (tail {tail})", a.t);
        }
    }
}

#[test]
fn floor_truncation_is_bounded() {
    // The part of int_0^r t |grad u|^2 dt below t_floor is at most t_floor^2 sup |grad u|^2.
    let g = TorusGrid::unit(1, 256).unwrap();
    let f = common::white_noise(g, 2);
    let mesh = TimeMesh::with_defaults(0.5).unwrap();
    let stack = ExtensionStack::build(&f, SemigroupKind::Poisson, &mesh).unwrap();
    let sup_grad2 = stack.base().gradient_density(true).into_iter().fold(0.0, f64::max);
    let bound = mesh.t_floor().powi(2) * sup_grad2;
    let (ts, ws) = tlab::quadrature::gauss_legendre_on(12, 0.0, mesh.t_floor());
    for p in [0usize, 31, 128, 255] {
        let dropped: f64 = ts
            .iter()
            .zip(&ws)
            .map(|(&t, w)| w * t * stack.evaluate_point(p, t).gradient_norm(true).powi(2))
            .sum();
        assert!(dropped <= bound, "point {p}: {dropped} > {bound}");
    }
    let kept: f64 = stack
        .nodes()
        .iter()
        .zip(mesh.weights())
        .map(|(n, w)| w * n.t * n.gradient_density(true).iter().sum::<f64>() / g.len() as f64)
        .sum();
    assert!(bound <= 1e-5 * kept, "{bound} vs {kept}");
}

#[test]
fn modulus_bound_holds_for_a_smooth_trace() {
    let f = smooth(TorusGrid::unit(1, 128).unwrap());
    let stack = ExtensionStack::build(&f, SemigroupKind::Poisson, &TimeMesh::with_defaults(0.5).unwrap()).unwrap();
    for alpha in [-0.5, 0.0, 0.5] {
        let r = modulus_bound_check(&stack, alpha).unwrap();
        assert_eq!(r.coincident_difference, 0.0);
        assert!(r.max_ratio.is_finite() && r.pairs_checked > 0);
        assert!(r.max_ratio_near <= 1.0 + 1e-12, "alpha {alpha}: {r:?}");
        assert!(gradient_bound(&stack, alpha) > 0.0);
    }
}

#[test]
fn export_writes_readable_nodes() {
    let g = TorusGrid::unit(1, 32).unwrap();
    let f = smooth(g);
    let stack = ExtensionStack::build(&f, SemigroupKind::Heat, &TimeMesh::new(0.25, 2, 3).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    stack.export(dir.path()).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), stack.nodes().len());
    let back = tlab::io::load_field(dir.path().join(files[4].as_str().unwrap())).unwrap();
    assert_eq!(back, stack.values_field(4));
}
