mod common;

use common::finite_well_kappa;
use decaylab::analysis::*;
use decaylab::disorder::{realize_field, ModelParams, PotentialField};
use decaylab::operator::{assemble_free, assemble_single_well, Grid, LatticeBox, PointLattice};
use decaylab::spectral::lanczos_smallest;
use proptest::prelude::*;

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn finite_well_oracle_values() {
    let k = finite_well_kappa(-5.0);
    assert!((k - 1.585).abs() < 2e-3, "{k}");
    assert!((-k * k + 2.51).abs() < 1e-2);
}

#[test]
fn well_curve_matches_oracle_and_is_monotone() {
    let bx = LatticeBox::centered(1, 40).unwrap();
    let grid = Grid::new(20).unwrap();
    let ladder = [-50.0, -20.0, -10.0, -5.0, -2.0, -0.5];
    let curve = single_well_ground_curve(&ladder, &bx, &grid).unwrap();
    for p in &curve {
        assert!(p.binds, "{} -> {}", p.depth, p.energy);
        assert!(p.occupation > 0.0 && p.occupation <= 1.0);
    }
    for w in curve.windows(2) {
        assert!(w[0].energy < w[1].energy);
    }
    let k = finite_well_kappa(-5.0);
    assert!((curve[3].energy + k * k).abs() < 2e-2, "{}", curve[3].energy);
    assert!(curve[0].occupation >= 0.9, "{}", curve[0].occupation);
}

#[test]
fn shallow_well_in_three_dimensions_is_only_flagged() {
    let bx = LatticeBox::centered(3, 4).unwrap();
    let grid = Grid::new(2).unwrap();
    let p = &single_well_ground_curve(&[-0.1], &bx, &grid).unwrap()[0];
    assert!(!p.binds);
}

#[test]
fn hellmann_feynman_identity() {
    let bx = LatticeBox::centered(1, 40).unwrap();
    let grid = Grid::new(20).unwrap();
    let a = hellmann_feynman_check(-5.0, 1e-3, &bx, &grid).unwrap();
    assert!(a.discrepancy <= 1e-3, "{a:?}");
    let b = hellmann_feynman_check(-5.0, 1e-3, &bx, &grid).unwrap();
    assert_eq!(a, b);
    let coarse = hellmann_feynman_check(-5.0, 1e-2, &bx, &grid).unwrap();
    assert!(a.discrepancy <= coarse.discrepancy);
}

#[test]
fn deep_well_is_more_localized_than_free_state() {
    let bx = LatticeBox::centered(1, 40).unwrap();
    let grid = Grid::new(10).unwrap();
    let well = &single_well_ground_curve(&[-20.0], &bx, &grid).unwrap()[0];
    let free = lanczos_smallest(&assemble_free(&bx, &grid).unwrap(), 1, 1e-12, 1).unwrap();
    let free_ipr = ipr(&free.eigenvectors.unwrap()[0]).unwrap();
    assert!(ipr(&well.ground_state).unwrap() >= 5.0 * free_ipr);
}

#[test]
fn decay_fit_on_well_and_free_states() {
    let bx = LatticeBox::centered(1, 40).unwrap();
    let grid = Grid::new(20).unwrap();
    let well = &single_well_ground_curve(&[-5.0], &bx, &grid).unwrap()[0];
    let fit = decay_fit(&well.ground_state, &bx, &grid).unwrap();
    let k = finite_well_kappa(-5.0);
    assert!((fit.rate - k).abs() <= 0.15 * k, "{} vs {k}", fit.rate);

    let free = lanczos_smallest(&assemble_free(&bx, &grid).unwrap(), 1, 1e-12, 1).unwrap();
    let f = decay_fit(&free.eigenvectors.unwrap()[0], &bx, &grid).unwrap();
    assert!(f.r2 < 0.9 || f.rate < 0.05, "{f:?}");
}

#[test]
fn weyl_slopes() {
    let grid = Grid::new(20).unwrap();
    let rs = [4.0, 8.0, 16.0, 32.0];
    let resid = |e: f64, k: f64| -> Vec<f64> {
        rs.iter()
            .map(|&r| {
                let bx = LatticeBox::centered(1, 2 * r as u32 + 2).unwrap();
                weyl_residual(&WeylPacket::new(e, &[k], r).unwrap(), &bx, &grid, None).unwrap()
            })
            .collect()
    };
    let lr: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let s0 = slope(&lr, &resid(0.0, 0.0).iter().map(|x| x.ln()).collect::<Vec<_>>());
    let s1 = slope(&lr, &resid(1.0, 1.0).iter().map(|x| x.ln()).collect::<Vec<_>>());
    assert!((s0 + 2.0).abs() <= 0.3, "{s0}");
    assert!((s1 + 1.0).abs() <= 0.2, "{s1}");
}

#[test]
fn weyl_residual_with_small_field_obeys_triangle_bound() {
    let grid = Grid::new(20).unwrap();
    let bx = LatticeBox::centered(1, 34).unwrap();
    let packet = WeylPacket::new(1.0, &[1.0], 16.0).unwrap();
    let n = 50.0;
    let params = ModelParams::new(1, 1.0, 1.0).unwrap();
    let field = PotentialField::from_fn(params, bx, |s| ((s.0[0] as f64) * 0.37).sin() / n).unwrap();
    let free = weyl_residual(&packet, &bx, &grid, None).unwrap();
    let with = weyl_residual(&packet, &bx, &grid, Some(&field)).unwrap();
    assert!(with <= free + 1.0 / n + 1e-12);
}

#[test]
fn cook_sums_match_series() {
    let params = ModelParams::new(1, 2.0, 3.0).unwrap();
    let bx = LatticeBox::centered(1, 64).unwrap();
    let ones = PotentialField::from_fn(params, bx, |_| 1.0).unwrap();
    let radii = [1, 5, 10, 31];
    let sums = cook_integral_probe(&ones, 1.0, &radii).unwrap();
    for (r, s) in radii.iter().zip(&sums) {
        let want = 1.0 + (1..=*r).map(|n| 2.0 / ((1 + n) as f64).powi(2)).sum::<f64>();
        assert!((s - want).abs() < 1e-13);
    }
    let zero = PotentialField::from_fn(params, bx, |_| 0.0).unwrap();
    assert!(cook_integral_probe(&zero, 1.0, &radii)
        .unwrap()
        .iter()
        .all(|&s| s == 0.0));
    assert!(cook_integral_probe(&ones, 1.0, &[40]).is_err());
}

#[test]
fn cook_increments_shrink_across_the_ensemble() {
    let params = ModelParams::new(1, 2.0, 3.0).unwrap();
    let bx = LatticeBox::centered(1, 802).unwrap();
    let radii = [50, 100, 200, 400];
    let mut inc = vec![Vec::new(); 3];
    for seed in 0..100 {
        let f = realize_field(seed, &params, &bx).unwrap();
        let s = cook_integral_probe(&f, 1.0, &radii).unwrap();
        for i in 0..3 {
            inc[i].push(s[i + 1] - s[i]);
        }
    }
    let med: Vec<f64> = inc
        .into_iter()
        .map(|mut v| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        })
        .collect();
    assert!(med[0] > med[1] && med[1] > med[2], "{med:?}");
}

#[test]
fn cook_time_integral_converges_for_decaying_field() {
    let params = ModelParams::new(1, 2.0, 3.0).unwrap();
    let bx = LatticeBox::centered(1, 1000).unwrap();
    let f = realize_field(11, &params, &bx).unwrap();
    let times: Vec<f64> = (0..=120).map(|i| 1.0 + 2.0 * i as f64).collect();
    let acc = cook_time_integral_probe(&f, 1.0, 2.0, &times).unwrap();
    assert!(acc.windows(2).all(|w| w[1] >= w[0]));
    let late = acc[120] - acc[60];
    let early = acc[60] - acc[0];
    assert!(late < early);
}

proptest! {
    #[test]
    fn ipr_is_bounded(v in prop::collection::vec(-1.0f64..1.0, 2..64)) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
        let n = v.len() as f64;
        let p = ipr(&unit(v)).unwrap();
        prop_assert!(p >= 1.0 / n - 1e-12 && p <= 1.0 + 1e-12);
    }

    #[test]
    fn decay_fit_recovers_planted_rates(rate in 0.1f64..2.0) {
        let bx = LatticeBox::centered(1, 60).unwrap();
        let grid = Grid::new(2).unwrap();
        let pts = PointLattice::for_box(&bx, &grid).unwrap();
        let psi = unit((0..pts.len()).map(|i| (-rate * pts.coords(i)[0].abs()).exp()).collect());
        let f = decay_fit_on(&psi, &pts).unwrap();
        prop_assert!((f.rate - rate).abs() < 1e-3);
        prop_assert!(f.r2 >= 0.999);
    }
}

#[test]
fn single_well_occupation_uses_assembled_mask() {
    // potential diagonal minus kinetic diagonal marks the well points
    let bx = LatticeBox::centered(1, 8).unwrap();
    let grid = Grid::new(4).unwrap();
    let op = assemble_single_well(-3.0, &bx, &grid).unwrap();
    let marked = op.diagonal().iter().filter(|&&d| d < 2.0 * 16.0 - 1.0).count();
    assert_eq!(marked, 4);
}
