use pom_core::agents::{
    decide, expected_revenue_rate, pom_multiplier, Hysteresis, MinerAgent, PomCredit,
};
use pom_core::metrics::large_miner_share;
use proptest::prelude::*;

const TARGET: f64 = 120.0;

fn miner(h: f64, c: f64, active: bool, dwell: u32) -> MinerAgent {
    let mut m = MinerAgent::new(0, h, c, 100).unwrap();
    m.active = active;
    m.dwell_remaining = dwell;
    m
}

fn hysteresis() -> impl Strategy<Value = Hysteresis> {
    (1.0f64..2.0, 0.1f64..=1.0, 0u32..20)
        .prop_map(|(on, off, dwell)| Hysteresis::new(on, off, dwell).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn scaling_price_and_costs_together_keeps_decisions(
        costs in prop::collection::vec((0.1f64..20.0, 0.0f64..0.1, any::<bool>(), 0u32..3), 1..20),
        reward in 0.0f64..10.0,
        price in 0.01f64..10.0,
        k in -20i32..20,
        h in hysteresis(),
    ) {
        let factor = 2f64.powi(k);
        let total: f64 = costs.iter().map(|c| c.0).sum();
        for &(hash, cost, active, dwell) in &costs {
            let plain = miner(hash, cost, active, dwell);
            let scaled = miner(hash, cost * factor, active, dwell);
            let r1 = expected_revenue_rate(&plain, total, reward, price, TARGET).unwrap();
            let r2 = expected_revenue_rate(&scaled, total, reward, price * factor, TARGET).unwrap();
            prop_assert_eq!(decide(plain, r1, &h).active, decide(scaled, r2, &h).active);
        }
    }

    #[test]
    fn constant_conditions_flip_at_most_once(
        hash in 0.1f64..20.0,
        cost in 0.0f64..0.1,
        revenue in 0.0f64..5.0,
        active in any::<bool>(),
        h in hysteresis(),
    ) {
        let mut m = miner(hash, cost, active, 0);
        let mut flips = 0;
        for _ in 0..200 {
            let next = decide(m.clone(), revenue, &h);
            if next.active != m.active {
                flips += 1;
            }
            m = next;
        }
        prop_assert!(flips <= 1);
    }

    #[test]
    fn active_shares_sum_to_one(
        rates in prop::collection::vec((1e-3f64..1e3, any::<bool>()), 1..50),
    ) {
        let miners: Vec<_> = rates.iter().map(|&(h, a)| miner(h, 0.0, a, 0)).collect();
        let total: f64 = miners.iter().filter(|m| m.active).map(|m| m.hashrate).sum();
        prop_assume!(total > 0.0);
        // With unit reward, price and block rate the revenue is the share.
        let sum: f64 = miners
            .iter()
            .filter(|m| m.active)
            .map(|m| expected_revenue_rate(m, total, 1.0, 1.0, 3600.0).unwrap())
            .sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn credit_grows_with_activity(
        window in 1u32..300,
        required_frac in 0.0f64..=1.0,
        pattern in prop::collection::vec(any::<bool>(), 0..400),
    ) {
        let required = ((f64::from(window) * required_frac).ceil() as u32).clamp(1, window);
        let credit = PomCredit::new(window, required).unwrap();
        let mut m = MinerAgent::new(0, 1.0, 0.0, window as usize).unwrap();
        for &a in &pattern {
            // Flipping an idle block to active never lowers credit.
            let mut more = m.clone();
            more.history.push(true);
            m.history.push(a);
            let (x, y) = (pom_multiplier(&m, &credit), pom_multiplier(&more, &credit));
            prop_assert!(y >= x);
            prop_assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn share_ignores_hashrate_units(
        rates in prop::collection::vec((1e-3f64..1e3, any::<bool>()), 0..50),
        threshold in 1e-3f64..1e3,
        k in -30i32..30,
    ) {
        let f = 2f64.powi(k);
        let a: Vec<_> = rates.iter().map(|&(h, on)| miner(h, 0.0, on, 0)).collect();
        let b: Vec<_> = rates.iter().map(|&(h, on)| miner(h * f, 0.0, on, 0)).collect();
        let (x, y) = (large_miner_share(&a, threshold), large_miner_share(&b, threshold * f));
        prop_assert_eq!(x, y);
        prop_assert!((0.0..=1.0).contains(&x));
    }
}
