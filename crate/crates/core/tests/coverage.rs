use heatcov::coverage::*;
use heatcov::geometry::*;
use heatcov::Vec2;
use proptest::prelude::*;

fn square(side: f64, h: f64) -> RegionGrid {
    build_region(&RegionSpec { outer: Rect::new(0.0, 0.0, side, side), holes: vec![], spacing: h }).unwrap()
}

fn agent(id: usize, x: f64, y: f64, kernel: CoverageKernel) -> AgentState {
    AgentState { id, position: Vec2::new(x, y), speed: 0.5, kernel }
}

const REF: CoverageKernel = CoverageKernel { capacity: 6.0, lambda: 1.0, r: 0.5 };

#[test]
fn reference_kernel_speed() {
    let v = coverage_speed(&REF);
    assert!((v - 3.4006).abs() < 1e-4, "{v}");
    let q = coverage_speed_quadrature(&REF, 0.005);
    assert!((q - v).abs() / v < 5e-3);
}

#[test]
fn optimal_time_formula() {
    assert!((optimal_time(5666.0, 5, 3.4006).unwrap() - 5666.0 / (5.0 * 3.4006)).abs() < 1e-12);
    assert!(optimal_time(1.0, 0, 1.0).is_err());
}

#[test]
fn kernel_support_is_exact() {
    for d in [0.5 + f64::EPSILON, 0.51, 3.0, 1e9] {
        assert_eq!(kernel_eval(&REF, d).unwrap().to_bits(), 0f64.to_bits());
    }
    assert!(kernel_eval(&REF, 0.5).unwrap() > 0.0);
}

#[test]
fn stationary_agent_removes_at_most_its_speed() {
    let region = square(4.0, 0.05);
    let mut w = initial_workload(&region, &[GaussianTerm { amplitude: 50.0, center: [2.0, 2.0], width: 4.0 }]).unwrap();
    let a = [agent(0, 2.0, 2.0, REF)];
    let v = coverage_speed(&REF);
    let dt = 0.1;
    let before = total_workload(&w, None);
    let d = apply_coverage_step(&mut w, &a, dt);
    // No clamping on a 50-high plateau: exactly the discretised rate.
    assert!(d.removed <= v * dt * 1.02 && d.removed >= v * dt * 0.98, "{}", d.removed);
    assert!((before - total_workload(&w, None) - d.removed).abs() < 1e-9);
}

#[test]
fn far_cells_are_untouched() {
    let region = square(4.0, 0.1);
    let mut w = initial_workload(&region, &[GaussianTerm { amplitude: 1.0, center: [2.0, 2.0], width: 10.0 }]).unwrap();
    let before = w.raster();
    apply_coverage_step(&mut w, &[agent(0, 0.5, 0.5, REF)], 0.1);
    let after = w.raster();
    let g = region.geometry();
    for &c in region.cells().members() {
        if g.center(c).dist(Vec2::new(0.5, 0.5)) > 0.5 {
            assert_eq!(before[c].to_bits(), after[c].to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decay_is_monotone_and_nonnegative(
        steps in 1usize..40,
        positions in prop::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..4),
        amp in 0.01f64..10.0,
    ) {
        let region = square(3.0, 0.1);
        let mut w = initial_workload(&region, &[GaussianTerm { amplitude: amp, center: [1.5, 1.5], width: 1.0 }]).unwrap();
        let agents: Vec<_> = positions.iter().enumerate().map(|(i, &(x, y))| agent(i, x, y, REF)).collect();
        let mut last = total_workload(&w, None);
        let before = w.raster();
        for _ in 0..steps {
            apply_coverage_step(&mut w, &agents, 0.1);
            let now = total_workload(&w, None);
            prop_assert!(now <= last);
            last = now;
        }
        let after = w.raster();
        for c in 0..after.len() {
            prop_assert!(after[c] >= 0.0 && after[c] <= before[c]);
        }
        prop_assert!((w.running_total() - last).abs() <= 1e-9 * w.initial_total());
    }

    #[test]
    fn closed_form_matches_quadrature(p in 0.5f64..10.0, lambda in 0.05f64..4.0, r in 0.2f64..2.0) {
        let k = CoverageKernel { capacity: p, lambda, r };
        let v = coverage_speed(&k);
        let q = coverage_speed_quadrature(&k, r / 100.0);
        prop_assert!((v - q).abs() / v < 5e-3);
    }
}
