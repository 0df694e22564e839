mod common;

use common::{random_beamformers, random_orientations, rng, scenario, Shape};
use rotsec_core::channel::ChannelModel;
use rotsec_core::linalg::{re_inner, trace_re, CMat, CVec3, Vec3, C64};
use rotsec_core::orient_opt::OrientObjective;
use rotsec_core::rate::{rate_gap, surrogate_f, update_auxiliaries};
use rotsec_core::scenario::OrientationSet;

const STEP: f64 = 1e-6;

fn unit(i: usize) -> Vec3 {
    let mut e = Vec3::zeros();
    e[i] = 1.0;
    e
}

fn central(mut eval: impl FnMut(Vec3) -> C64, f: Vec3) -> CVec3 {
    CVec3::from_fn(|i, _| (eval(f + unit(i) * STEP) - eval(f - unit(i) * STEP)) / (2.0 * STEP))
}

#[test]
fn channel_derivatives_match_finite_differences() {
    for (seed, p) in [(1, 1.0), (2, 2.0), (3, 1.5)] {
        let shape = Shape { p, rcs: 1e6, ..Shape::default() };
        let sc = scenario(seed, &shape);
        let model = ChannelModel::new(&sc).unwrap();
        let mut r = rng(seed + 100);
        let orient = random_orientations(&mut r, &sc);
        for n in 0..sc.n_tx() {
            let g = model.grad_tx(&orient, n);
            for m in 0..sc.n_rx() {
                let fr = orient.rx[0][m];
                let fd = central(|ft| model.legit_entry(0, m, n, &ft, &fr), orient.tx[n]);
                assert!((g.legit[0][m] - fd).norm() <= 1e-6 * fd.norm().max(1e-8), "tx legit n={n} m={m}");
            }
            for q in 0..sc.n_eve() {
                let fd = central(|ft| model.eve_entry(q, n, &ft), orient.tx[n]);
                assert!((g.eve[q] - fd).norm() <= 1e-6 * fd.norm().max(1e-8), "tx eve n={n} q={q}");
            }
        }
        for m in 0..sc.n_rx() {
            let g = model.grad_rx(&orient, 0, m);
            for n in 0..sc.n_tx() {
                let ft = orient.tx[n];
                let fd = central(|fr| model.legit_entry(0, m, n, &ft, &fr), orient.rx[0][m]);
                assert!((g[n] - fd).norm() <= 1e-6 * fd.norm().max(1e-8), "rx m={m} n={n}");
            }
        }
    }
}

/// `q(H⁺) − q(H⁻)` for `q(H) = Tr(HAHᴴC) − 2Re Tr(DHᴴ)`, written in terms of
/// the channel difference so that the large constant part of the loss
/// cancels exactly instead of in floating point.
fn quad_diff(plus: &CMat, minus: &CMat, a: &CMat, cm: &CMat, d: &CMat) -> f64 {
    let delta = plus - minus;
    let sum = plus + minus;
    trace_re(&(&delta * a * sum.adjoint() * cm)) - 2.0 * re_inner(d, &delta)
}

fn loss_diff(obj: &OrientObjective, model: &ChannelModel, plus: &OrientationSet, minus: &OrientationSet) -> f64 {
    let (p, m) = (model.build(plus), model.build(minus));
    let zero = CMat::zeros(obj.d_e.nrows(), obj.d_e.ncols());
    let mut total = quad_diff(&p.eve, &m.eve, &obj.w_x, &obj.c_x, &zero) + quad_diff(&p.eve, &m.eve, &obj.r_z, &obj.c_e, &obj.d_e);
    for (k, t) in obj.receivers.iter().enumerate() {
        total += t.weight * quad_diff(&p.legit[k], &m.legit[k], &obj.w_x, &t.c, &t.d);
    }
    total
}

#[test]
fn loss_difference_matches_direct_evaluation() {
    let sc = scenario(9, &Shape::default());
    let model = ChannelModel::new(&sc).unwrap();
    let mut r = rng(3);
    let a = random_orientations(&mut r, &sc);
    let b = random_orientations(&mut r, &sc);
    let ch = model.build(&a);
    let bf = random_beamformers(&mut r, sc.n_tx(), sc.streams, sc.p_max);
    let aux = update_auxiliaries(&ch.legit[0], &ch.eve, &bf, &sc.radio).unwrap();
    let obj = OrientObjective::single(&aux, &bf, &sc.radio);
    let direct = obj.loss(&model.build(&a)) - obj.loss(&model.build(&b));
    let diff = loss_diff(&obj, &model, &a, &b);
    assert!((direct - diff).abs() <= 1e-9 * obj.loss(&ch).abs());
}

#[test]
fn orientation_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let shape = Shape { receivers: 2, ..Shape::default() };
        let sc = scenario(seed, &shape);
        let model = ChannelModel::new(&sc).unwrap();
        let mut r = rng(seed + 7);
        let orient = random_orientations(&mut r, &sc);
        let ch = model.build(&orient);
        let bf = random_beamformers(&mut r, sc.n_tx(), sc.streams, sc.p_max);
        let aux0 = update_auxiliaries(&ch.legit[0], &ch.eve, &bf, &sc.radio).unwrap();
        let aux1 = update_auxiliaries(&ch.legit[1], &ch.eve, &bf, &sc.radio).unwrap();
        let obj = OrientObjective::new(&[(&aux0.legit, 0.7), (&aux1.legit, 1.3)], &aux0.eve, &bf, &sc.radio);

        let check = |analytic: Vec3, perturb: &dyn Fn(&mut OrientationSet, Vec3)| {
            let fd = Vec3::from_fn(|i, _| {
                let mut plus = orient.clone();
                perturb(&mut plus, unit(i) * STEP);
                let mut minus = orient.clone();
                perturb(&mut minus, -unit(i) * STEP);
                loss_diff(&obj, &model, &plus, &minus) / (2.0 * STEP)
            });
            let err = (analytic - fd).norm() / analytic.norm().max(fd.norm()).max(1e-12);
            assert!(err < 1e-4, "relative error {err:e}: {analytic:?} vs {fd:?}");
        };
        for n in 0..sc.n_tx() {
            check(obj.grad_tx(&model, &orient, &ch, n), &|o, d| o.tx[n] += d);
        }
        for k in 0..2 {
            for m in 0..sc.n_rx() {
                check(obj.grad_rx(&model, &orient, &ch, k, m), &|o, d| o.rx[k][m] += d);
            }
        }
    }
}

#[test]
fn surrogate_is_tight_after_auxiliary_update() {
    for seed in 0..20 {
        let shape = Shape {
            tx: (2, 1 + seed as usize % 4),
            streams: 1 + seed as usize % 2,
            ..Shape::default()
        };
        let sc = scenario(seed, &shape);
        let model = ChannelModel::new(&sc).unwrap();
        let mut r = rng(seed + 11);
        let ch = model.build(&random_orientations(&mut r, &sc));
        let bf = random_beamformers(&mut r, sc.n_tx(), sc.streams, sc.p_max);
        let aux = update_auxiliaries(&ch.legit[0], &ch.eve, &bf, &sc.radio).unwrap();
        let f = surrogate_f(&ch.legit[0], &ch.eve, &bf, &aux, &sc.radio).unwrap();
        let gap = rate_gap(&ch.legit[0], &ch.eve, &bf, &sc.radio).unwrap();
        assert!((f / std::f64::consts::LN_2 - gap).abs() < 1e-8, "seed {seed}: {f} vs {gap}");

        // any other auxiliaries give a lower value
        let other = random_beamformers(&mut r, sc.n_tx(), sc.streams, sc.p_max);
        let stale = update_auxiliaries(&ch.legit[0], &ch.eve, &other, &sc.radio).unwrap();
        let g = surrogate_f(&ch.legit[0], &ch.eve, &bf, &stale, &sc.radio).unwrap();
        assert!(g <= f + 1e-9 * f.abs().max(1.0));
    }
}
