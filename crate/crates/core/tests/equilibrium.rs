mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use wardrop::costs::CostModel;
use wardrop::equilibrium::*;
use wardrop::network::{build_incidence, enumerate_paths, pigou};
use wardrop::synthetic::{build_instance, InstanceSpec};
use wardrop::uncertainty::{sample_scenarios, FlowBox, ScenarioSet, UncertaintyModel};

#[test]
fn strongly_monotone_costs_have_a_single_interior_root() {
    let net = pigou();
    let inc = build_incidence(&net, &enumerate_paths(&net, 2, 10).unwrap());
    let costs =
        CostModel::coupled(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]), DVector::from_vec(vec![-3.0, -3.0]))
            .unwrap();
    let model = UncertaintyModel::new(
        DMatrix::from_element(1, 1, 1.0),
        DVector::from_element(1, 10.0),
        0.0,
        FlowBox::uniform(2, 5.0).unwrap(),
    )
    .unwrap();
    let set = ScenarioSet::nominal(&model);
    let cfg = SolverConfig { n_starts: 20, ..SolverConfig::default() };
    let est = estimate_equilibrium_set(&costs, &set, &inc, &cfg, 3).unwrap();
    assert_eq!(est.len(), 1);
    assert!((&est.cloud[0].p - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-7);
}

#[test]
fn wardrop_report_on_braess() {
    let inst = braess_instance();
    let set = ScenarioSet::nominal(&inst.model);
    let pt = extragradient(&inst.costs, &set, &inst.inc, &DVector::from_vec(vec![6.0, 0.0, 0.0]), &SolverConfig::default())
        .unwrap();
    let report = verify_wardrop(&pt, &inst.paths, &inst.costs, &inst.inc, inst.model.flow_box(), 1e-6).unwrap();
    assert!(report.wardrop_satisfied() && report.vi_satisfied(1e-8));
    assert!((report.per_od[0].min_cost - 9.2).abs() < 1e-6);

    let off = EquilibriumPoint { p: DVector::from_vec(vec![6.0, 0.0, 0.0]), residual: 1.0, iterations: 0, converged: false };
    let report = verify_wardrop(&off, &inst.paths, &inst.costs, &inst.inc, inst.model.flow_box(), 1e-6).unwrap();
    assert_eq!(report.per_od[0].flagged, vec![0]);
    assert!(!report.vi_satisfied(1e-8));
}

#[test]
fn filtering_is_nested_and_ignores_non_cutting_samples() {
    let inst = build_instance(&InstanceSpec::default(), 11).unwrap();
    let cfg = SolverConfig { n_starts: 150, ..SolverConfig::default() };
    let est = estimate_equilibrium_set(&inst.costs, &ScenarioSet::nominal(&inst.model), &inst.incidence, &cfg, 5).unwrap();
    assert!(est.cloud.windows(2).all(|w| w[0].p.iter().zip(w[1].p.iter()).find(|(a, b)| a != b).is_some_and(|(a, b)| a < b)));

    let small = sample_scenarios(&inst.model, 10, 3);
    let large = small.extend(40);
    let s = filter_cloud(&est, &small, &inst.incidence).unwrap();
    let l = filter_cloud(&est, &large, &inst.incidence).unwrap();
    assert!(l.cloud.iter().all(|p| s.cloud.contains(p)));
    assert_eq!(filter_cloud(&l, &small, &inst.incidence).unwrap().cloud, l.cloud);

    // A sample at the top of the support loosens every row of a nonnegative b₀.
    let loose = inst.model.b0().map(|b| b.abs() * inst.model.rho());
    let with_loose = ScenarioSet::from_samples(&inst.model, [small.samples().to_vec(), vec![loose]].concat()).unwrap();
    assert_eq!(filter_cloud(&est, &with_loose, &inst.incidence).unwrap().cloud, s.cloud);
}

#[test]
fn cloud_csv_round_trip() {
    let inst = pigou_instance();
    let cfg = SolverConfig { n_starts: 5, ..SolverConfig::default() };
    let est = estimate_equilibrium_set(&inst.costs, &ScenarioSet::nominal(&inst.model), &inst.inc, &cfg, 1).unwrap();
    let text = cloud_to_csv(&est, 2);
    assert!(text.starts_with("idx,converged,residual,p_1,p_2\n"));
    let back = cloud_from_csv(&text).unwrap();
    assert_eq!(back.points().collect::<Vec<_>>(), est.points().collect::<Vec<_>>());
    assert!(cloud_from_csv("idx,converged\n").is_err());
}
