use urllc_core::availability::unavailability;
use urllc_core::channel::large_scale_gain_db;
use urllc_core::modes::packet_loss_d2d;
use urllc_core::range::{available_range_fixed_split, candidate_splits, maximize_range, RANGE_TOL};
use urllc_core::special::normal_cdf;
use urllc_core::{
    AvailabilityScenario, ChannelParams, DelayBudget, Error, McBudget, ModeId, QosRequirement,
    SystemParams,
};

fn scenario(mode: ModeId, nt: u32, d_p: f64, d_b: f64) -> AvailabilityScenario {
    AvailabilityScenario {
        mode,
        channel: ChannelParams::default(),
        sys: SystemParams {
            nt,
            ..SystemParams::default()
        },
        qos: QosRequirement::default(),
        budget: DelayBudget {
            d_max: 1e-3,
            d_p,
            d_b,
            t1: 5e-4,
            t2: 5e-4,
        },
        r_cell: 250.0,
        rho_c: None,
        rho_d: None,
        mc: McBudget::default(),
    }
}

fn bisect(mut lo: f64, mut hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[test]
fn d2d_range_matches_shadowing_quantile() {
    let sc = scenario(ModeId::D2d, 1, 0.0, 0.0);
    let t = 4e-4;
    let r = available_range_fixed_split(t, t, &sc).unwrap();
    // Availability 1 - 1e-5 is the shadowing quantile Phi^-1(1e-5) sigma.
    let q = bisect(-10.0, 0.0, |x| normal_cdf(x) >= 1e-5);
    let delta = 8.0 * q;
    let loss = |r: f64| {
        let g = 10f64.powf(large_scale_gain_db(r, delta, &sc.channel).unwrap() / 10.0);
        packet_loss_d2d(g, t, t, &sc.sys).unwrap()
    };
    let expect = bisect(1.0, 100.0, |r| loss(r) > 1e-7);
    assert!((r - expect).abs() <= RANGE_TOL + 1e-6, "{r} vs {expect}");
    assert!((9.0..10.5).contains(&r), "{r}");
}

#[test]
fn range_is_tight() {
    let sc = scenario(ModeId::DfCellular, 8, 0.0, 0.0);
    let (t1, t2) = (7e-4, 3e-4);
    let r = available_range_fixed_split(t1, t2, &sc).unwrap();
    let target = 1.0 - sc.qos.p_a;
    assert!(unavailability(&sc, r, t1, t2, None).unwrap() <= target);
    assert!(unavailability(&sc, r + 0.1, t1, t2, None).unwrap() > target);
    assert!(unavailability(&sc, r - 0.1, t1, t2, None).unwrap() <= target);
}

#[test]
fn stricter_availability_shrinks_range() {
    let mut sc = scenario(ModeId::DfCellular, 8, 0.0, 0.0);
    sc.qos.p_a = 0.999;
    let loose = available_range_fixed_split(7e-4, 3e-4, &sc).unwrap();
    sc.qos.p_a = 0.99999;
    let tight = available_range_fixed_split(7e-4, 3e-4, &sc).unwrap();
    assert!(tight < loose, "{tight} vs {loose}");
}

#[test]
fn df_multi_split_at_32_antennas() {
    let sc = scenario(ModeId::DfMulti, 32, 1e-4, 1e-4);
    let res = maximize_range(&sc).unwrap();
    assert!((res.t1_star - 4e-4).abs() < 1e-12, "{res:?}");
    assert!((res.t2_star - 4e-4).abs() < 1e-12, "{res:?}");
    assert!(res.residual >= 0.0);
    assert_eq!(res.candidates.len(), 7);
    let best = res
        .candidates
        .iter()
        .filter_map(|c| c.range)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(best, res.r_star);
    // Any split's own range agrees with its table entry.
    let c = &res.candidates[2];
    assert_eq!(
        Some(available_range_fixed_split(c.t1, c.t2, &sc).unwrap()),
        c.range
    );
}

#[test]
fn maximization_is_deterministic() {
    let sc = scenario(ModeId::DfCellular, 8, 0.0, 0.0);
    let a = maximize_range(&sc).unwrap();
    let b = maximize_range(&sc).unwrap();
    assert_eq!(a, b);
    assert_eq!(candidate_splits(&sc).len(), 9);
}

#[test]
fn short_budget_is_infeasible() {
    let mut sc = scenario(ModeId::DfMulti, 8, 4.5e-4, 4.5e-4);
    assert!(matches!(maximize_range(&sc), Err(Error::Infeasible(_))));
    sc.budget.d_p = 0.0;
    sc.budget.d_b = 0.0;
    sc.qos.eps_max = 1e-300;
    assert!(matches!(
        available_range_fixed_split(5e-4, 5e-4, &sc),
        Err(Error::Infeasible(_))
    ));
}
