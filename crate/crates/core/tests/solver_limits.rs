use dribem::model::{BcValue, BilayerScenario, EigenOrder, FaceBc, Inclusion, MaterialProps, TimeControl};
use dribem::postprocess::FieldEvaluator;
use dribem::solver::{build_global, solve_steady, solve_steady_bem, MeshSpec, Model, TransientRun};

fn bilayer(top: BcValue) -> BilayerScenario {
    BilayerScenario {
        origin: [0.0, 0.0],
        la: 1.0,
        lb: 1.0,
        h1: 1.0,
        h2: 1.0,
        upper: MaterialProps::new(4.0, 10.0),
        lower: MaterialProps::new(2.0, 3.0),
        bcs: [
            FaceBc::dirichlet(top),
            FaceBc::dirichlet(BcValue::Constant { value: 0.0 }),
            FaceBc::adiabatic(),
            FaceBc::adiabatic(),
            FaceBc::adiabatic(),
            FaceBc::adiabatic(),
        ],
        time: TimeControl::Transient { t0: 0.0, dt: 0.1, steps: 10 },
        u0: 0.0,
    }
}

fn spec() -> MeshSpec {
    MeshSpec {
        divisions: [3, 3, 3, 3],
        interior: [2, 2, 4],
        ..MeshSpec::default()
    }
}

#[test]
fn steady_bilayer_is_piecewise_linear() {
    let sc = bilayer(BcValue::Constant { value: 10.0 });
    let model = Model::new(&sc, &[], &spec()).unwrap();
    let sys = build_global(model).unwrap();
    let snap = solve_steady(&sys, 0.0).unwrap();
    let eval = FieldEvaluator::new(&sys.model, &[&snap]);
    let ui = 10.0 * 4.0 / 6.0;
    for (z, expect) in [(0.5, ui + 0.5 * (10.0 - ui)), (1e-3, ui + 1e-3 * (10.0 - ui)), (-0.5, 0.5 * ui)] {
        let s = eval.sample(&[0.4, 0.6, z]).unwrap()[0];
        assert!((s.u - expect).abs() < 1e-3 * 10.0, "z={z}: {} vs {expect}", s.u);
        let q = -4.0 * (10.0 - ui);
        assert!((s.q[2] - q).abs() < 1e-2 * q.abs(), "z={z}: q3 {} vs {q}", s.q[2]);
    }
    let reduced = solve_steady_bem(&sys.model, 0.0).unwrap();
    let nodes = sys.model.cols.nodes.clone();
    for c in nodes {
        assert!((reduced.values[c] - snap.values[c]).abs() < 1e-9);
    }
}

#[test]
fn transient_relaxes_to_steady() {
    let mut sc = bilayer(BcValue::Constant { value: 10.0 });
    sc.time = TimeControl::Transient { t0: 0.0, dt: 2.0, steps: 60 };
    let model = Model::new(&sc, &[], &spec()).unwrap();
    let sys = build_global(model).unwrap();
    let mut run = TransientRun::from_scenario(&sys).unwrap();
    let snaps = run.run(60).unwrap();
    let steady = solve_steady(&sys, 0.0).unwrap();
    let last = snaps.last().unwrap();
    for c in sys.model.cols.nodes.clone() {
        assert!((last.values[c] - steady.values[c]).abs() < 1e-4, "{} {}", last.values[c], steady.values[c]);
    }
}

#[test]
fn matched_inclusion_has_no_eigen_field() {
    let sc = bilayer(BcValue::Constant { value: 10.0 });
    let inc = Inclusion::new([0.5, 0.5, 0.4], [0.1; 3], sc.upper, EigenOrder::Quadratic);
    let model = Model::new(&sc, &[inc], &spec()).unwrap();
    let sys = build_global(model).unwrap();
    let mut run = TransientRun::from_scenario(&sys).unwrap();
    for s in run.run(3).unwrap() {
        for c in sys.model.cols.eigen.clone() {
            assert!(s.values[c].abs() < 1e-12);
        }
    }
}
