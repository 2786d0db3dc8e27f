use decaylab::disorder::*;
use decaylab::operator::{LatticeBox, Site};
use proptest::prelude::*;

#[test]
fn cdf_and_quantile_examples() {
    let d = FatTail::new(1.0).unwrap();
    assert_eq!(d.cdf(0.0), 0.5);
    assert!((d.cdf(1.0) - 0.75).abs() < 1e-15);
    assert!((d.cdf(-9.0) - 0.05).abs() < 1e-15);
    assert_eq!(d.quantile(0.5).unwrap(), 0.0);
    assert!((d.quantile(0.75).unwrap() - 1.0).abs() < 1e-14);
    assert!((d.quantile(0.1).unwrap() + 4.0).abs() < 1e-14);
    assert!(d.quantile(0.0).is_err() && d.quantile(1.0).is_err());
}

/// `∫ g(x) f(x) dx` over the real line for even `g`, by Simpson's rule after
/// `x = e^s - 1`, which turns the power tail into an exponential one.
fn expect(dist: &FatTail, g: impl Fn(f64) -> f64) -> f64 {
    let (n, span) = (400_000, 120.0);
    let h = span / n as f64;
    let integrand = |s: f64| {
        let x = s.exp_m1();
        2.0 * g(x) * dist.density(x) * s.exp()
    };
    let mut acc = integrand(0.0) + integrand(span);
    for i in 1..n {
        acc += integrand(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn density_integrates_to_one() {
    for delta in [0.5, 1.0, 2.5] {
        let d = FatTail::new(delta).unwrap();
        assert!((expect(&d, |_| 1.0) - 1.0).abs() < 1e-6, "{delta}");
    }
}

#[test]
fn site_sampler_matches_law() {
    let d = FatTail::new(1.0).unwrap();
    let n = 100_000;
    let mut xs: Vec<f64> = (0..n).map(|i| sample_site(42, &Site::new(&[i, 7]), &d)).collect();
    let freq = xs.iter().filter(|&&x| x < -9.0).count() as f64 / n as f64;
    assert!(
        (freq - 0.05).abs() <= 3.0 * (0.05f64 * 0.95 / n as f64).sqrt(),
        "{freq}"
    );
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            (d.cdf(x) - i as f64 / nf)
                .abs()
                .max(((i + 1) as f64 / nf - d.cdf(x)).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 1.628 / nf.sqrt(), "{ks}");
}

#[test]
fn field_moment_matches_quadrature() {
    let params = ModelParams::new(1, 2.0, 1.0).unwrap();
    let bx = LatticeBox::centered(1, 402).unwrap();
    let m_half = expect(params.tail(), |x| x.abs().sqrt());
    assert!((m_half - std::f64::consts::FRAC_PI_2).abs() < 1e-3, "{m_half}");
    let sites: Vec<Site> = (100..=200).flat_map(|n| [Site::new(&[n]), Site::new(&[-n])]).collect();
    let weight = sites.iter().map(|s| 1.0 / s.sup_norm() as f64).sum::<f64>() / sites.len() as f64;
    let mut total = 0.0;
    for seed in 0..100 {
        let f = realize_field(seed, &params, &bx).unwrap();
        total += sites.iter().map(|s| f.value(s).unwrap().abs().sqrt()).sum::<f64>();
    }
    let mean = total / (100 * sites.len()) as f64;
    let want = m_half * weight;
    assert!((mean - want).abs() <= 0.05 * want, "{mean} vs {want}");
}

#[test]
fn field_is_envelope_times_site_sample() {
    let params = ModelParams::new(2, 1.5, 0.7).unwrap();
    let bx = LatticeBox::centered(2, 10).unwrap();
    let f = realize_field(9, &params, &bx).unwrap();
    for (n, v) in f.iter() {
        let w = sample_site(9, &n, params.tail());
        assert_eq!(v, envelope_at(&n, params.envelope()) * w);
        assert!((v / w - envelope_at(&n, params.envelope())).abs() <= 1e-15);
    }
    assert_eq!(
        f.value(&Site::ORIGIN).unwrap(),
        sample_site(9, &Site::ORIGIN, params.tail())
    );
}

#[test]
fn restriction_consistency_across_nested_boxes() {
    for dim in 1..=2 {
        let params = ModelParams::new(dim, 1.0, 1.0).unwrap();
        let boxes: Vec<LatticeBox> = [6, 10, 20]
            .iter()
            .map(|&l| LatticeBox::centered(dim, l).unwrap())
            .collect();
        for seed in 0..50 {
            let big = realize_field(seed, &params, &boxes[2]).unwrap();
            for b in &boxes[..2] {
                assert_eq!(
                    realize_field(seed, &params, b).unwrap().values(),
                    big.restrict(b).unwrap().values()
                );
            }
        }
    }
}

#[test]
fn exceedance_hand_example() {
    let params = ModelParams::new(1, 0.0, 1.0).unwrap();
    let bx = LatticeBox::centered(1, 8).unwrap();
    let f = PotentialField::from_fn(params, bx, |n| match n.0[0] {
        1 => -2.0,
        2 => -0.4,
        3 => 5.0,
        _ => 0.0,
    })
    .unwrap();
    let e = tail_exceedance_count(&f, 0.0, 3).unwrap();
    assert_eq!(e.count, 1);
    assert_eq!(e.sites, vec![Site::new(&[1])]);
    assert!(tail_exceedance_count(&f, 0.0, 5).is_err());
}

#[test]
fn exceedances_are_summable_in_the_decay_regime() {
    let params = ModelParams::new(1, 4.0, 1.0).unwrap();
    let bx = LatticeBox::centered(1, 1002).unwrap();
    let seeds = 200;
    let (mut c400, mut c500) = (Vec::new(), Vec::new());
    for seed in 0..seeds {
        let f = realize_field(seed, &params, &bx).unwrap();
        c400.push(tail_exceedance_count(&f, -0.5, 400).unwrap().count as f64);
        c500.push(tail_exceedance_count(&f, -0.5, 500).unwrap().count as f64);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&c500) - mean(&c400) < 0.05);
    // two sites per radius, each with P(ω < -n^{3.5}) = (1/2)(1 + n^{3.5})^{-1}
    let oracle: f64 = (1..=500).map(|n| 1.0 / (1.0 + (n as f64).powf(3.5))).sum();
    let var: f64 = c500.iter().map(|x| (x - mean(&c500)).powi(2)).sum::<f64>() / (seeds as f64 - 1.0);
    assert!((mean(&c500) - oracle).abs() <= 3.0 * (var / seeds as f64).sqrt() + 1e-9);
}

#[test]
fn worked_event_values() {
    let params = ModelParams::new(1, 1.0, 1.0).unwrap();
    let spec = EventSpec::new(Site::new(&[10]), 1, 0.1);
    assert!((event_probability_exact(&spec, &params).unwrap() - 0.5).abs() < 1e-15);
    let three = EventSpec::new(Site::new(&[10]), 2, 0.1);
    // independent oracle: 1 - F-tail at eps * j^alpha for j in {9, 10, 11}
    let want: f64 = [9.0, 10.0, 11.0]
        .iter()
        .map(|j: &f64| 1.0 - 1.0 / (1.0 + 0.1 * j))
        .product();
    assert!((want - 0.12406).abs() < 1e-5);
    assert!((event_probability_exact(&three, &params).unwrap() - want).abs() < 1e-14);
    let huge = EventSpec::new(Site::new(&[3]), 2, 1e6);
    assert!(event_probability_exact(&huge, &params).unwrap() >= 1.0 - 1e-5);
}

#[test]
fn window_event_uses_center_window() {
    let params = ModelParams::new(1, 1.0, 2.0).unwrap();
    let spec = EventSpec::new(Site::new(&[4]), 1, 0.1).with_window(-0.6, -0.4);
    // center weight 1/4: ω_4 ∈ (-2.4, -1.6)
    let t = params.tail();
    let want = t.cdf(-1.6) - t.cdf(-2.4);
    assert!((event_probability_exact(&spec, &params).unwrap() - want).abs() < 1e-15);
    let mc = event_probability_mc(&spec, &params, 5, 20_000).unwrap();
    assert!(mc.covers(want));
    assert!(event_probability_exact(&EventSpec::new(Site::new(&[4]), 1, 0.1).with_window(-0.1, 0.2), &params).is_err());
}

#[test]
fn monte_carlo_matches_exact() {
    let params = ModelParams::new(1, 1.0, 1.0).unwrap();
    let spec = EventSpec::new(Site::new(&[10]), 1, 0.1);
    let mc = event_probability_mc(&spec, &params, 1, 10_000).unwrap();
    assert!((mc.estimate - 0.5).abs() <= mc.half_width.max(0.015));
    let all = event_probability_mc(&EventSpec::new(Site::new(&[10]), 2, 1e9), &params, 1, 100).unwrap();
    assert_eq!(all.estimate, 1.0);
    assert_eq!(mc, event_probability_mc(&spec, &params, 1, 10_000).unwrap());
}

#[test]
fn rigorous_product_bound_holds() {
    for dim in 1..=2 {
        for &(alpha, delta) in &[(0.5, 1.0), (1.0, 2.0), (2.0, 0.5)] {
            let params = ModelParams::new(dim, alpha, delta).unwrap();
            for k in 1..=3u32 {
                for &eps in &[0.1, 0.5, 1.0] {
                    let m = Site::new(&vec![i64::from(10 * k); dim]);
                    let spec = EventSpec::new(m, k, eps);
                    let exact = event_probability_exact(&spec, &params).unwrap();
                    assert!(exact >= event_lower_bound_product(&spec, &params));
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn quantile_round_trip(u in 1e-9f64..1.0 - 1e-9, delta in 0.2f64..5.0) {
        let d = FatTail::new(delta).unwrap();
        let q = d.quantile(u).unwrap();
        prop_assert!((d.cdf(q) - u).abs() <= 1e-12 * u.max(1e-300) + 1e-15);
        let anti = d.quantile(1.0 - u).unwrap();
        prop_assert!((anti + q).abs() <= 1e-12 * q.abs().max(1.0) * 1e3);
    }

    #[test]
    fn tail_law(r in 0.0f64..1e6, delta in 0.2f64..5.0) {
        let d = FatTail::new(delta).unwrap();
        let want = 0.5 * (1.0 + r).powf(-delta);
        prop_assert!(((1.0 - d.cdf(r)) - want).abs() <= 1e-12 * want.max(1e-4));
    }

    #[test]
    fn event_probability_is_monotone(
        m in 2i64..60,
        k in 1u32..4,
        eps in 0.01f64..2.0,
        grow in 1.0f64..3.0,
        alpha in 0.0f64..2.0,
        delta in 0.3f64..3.0,
    ) {
        let params = ModelParams::new(1, alpha, delta).unwrap();
        let spec = EventSpec::new(Site::new(&[m]), k, eps);
        let p = event_probability_exact(&spec, &params).unwrap();
        let wider = event_probability_exact(&EventSpec::new(Site::new(&[m]), k, eps * grow), &params).unwrap();
        let bigger = event_probability_exact(&EventSpec::new(Site::new(&[m]), k + 1, eps), &params).unwrap();
        prop_assert!(wider >= p);
        prop_assert!(bigger <= p);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), x in -1000i64..1000, y in -1000i64..1000) {
        let d = FatTail::new(1.3).unwrap();
        let s = Site::new(&[x, y]);
        prop_assert_eq!(sample_site(seed, &s, &d).to_bits(), sample_site(seed, &s, &d).to_bits());
    }
}
