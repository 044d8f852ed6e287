mod common;

use common::{mean, variance};
use ldp_distance::mechanisms::{
    bit_flip_probability, laplace_sample, noisy_degree, resample_probability, rr_bit, rr_distance, total_budget,
    PrivacyParams, Protocol, RngStream,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const DRAWS: usize = 1_000_000;

fn within_sigmas(observed: f64, expected: f64, se: f64, k: f64) -> bool {
    (observed - expected).abs() <= k * se
}

#[test]
fn bit_flip_rate() {
    for (i, eps) in [0.1, 0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
        let mut rng = RngStream::new(11, i as u64);
        let flips = (0..DRAWS).filter(|k| rr_bit(k % 2 == 0, eps, &mut rng) != (k % 2 == 0)).count();
        let p = 1.0 / (1.0 + f64::exp(eps));
        let se = (p * (1.0 - p) / DRAWS as f64).sqrt();
        let rate = flips as f64 / DRAWS as f64;
        assert!(within_sigmas(rate, p, se, 3.0), "eps={eps}: rate {rate} vs {p}");
        assert_eq!(bit_flip_probability(eps), p);
    }
}

#[test]
fn distance_rr_goodness_of_fit() {
    for big_t in [4u32, 6, 8] {
        for (j, eps) in [0.5, 1.0, 3.0].into_iter().enumerate() {
            let x = big_t / 2;
            let mut rng = RngStream::new(12, (big_t as u64) << 8 | j as u64);
            let mut counts = vec![0u64; big_t as usize];
            for _ in 0..DRAWS {
                let y = rr_distance(x, eps, big_t, &mut rng).unwrap();
                counts[(y - 1) as usize] += 1;
            }
            let p = big_t as f64 / (f64::exp(eps) + big_t as f64 - 1.0);
            assert!((resample_probability(eps, big_t) - p).abs() < 1e-15);
            let chi2: f64 = counts
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let keep = if i as u32 + 1 == x { 1.0 - p } else { 0.0 };
                    let expected = DRAWS as f64 * (keep + p / big_t as f64);
                    (c as f64 - expected).powi(2) / expected
                })
                .sum();
            let dist = ChiSquared::new(big_t as f64 - 1.0).unwrap();
            let p_value = 1.0 - dist.cdf(chi2);
            assert!(p_value > 0.001, "T={big_t} eps={eps}: chi2={chi2} p={p_value}");
        }
    }
}

#[test]
fn distance_rr_rejects_out_of_range() {
    let mut rng = RngStream::from_seed(1);
    assert!(rr_distance(0, 1.0, 6, &mut rng).is_err());
    assert!(rr_distance(7, 1.0, 6, &mut rng).is_err());
    assert!(rr_distance(3, 0.0, 6, &mut rng).is_err());
    assert_eq!(rr_distance(3, f64::INFINITY, 6, &mut rng).unwrap(), 3);
}

#[test]
fn laplace_moments() {
    for (i, b) in [0.5, 1.0, 5.0].into_iter().enumerate() {
        let mut rng = RngStream::new(13, i as u64);
        let xs: Vec<f64> = (0..DRAWS).map(|_| laplace_sample(b, &mut rng).unwrap()).collect();
        let n = DRAWS as f64;
        assert!(within_sigmas(mean(&xs), 0.0, (2.0f64).sqrt() * b / n.sqrt(), 3.0));
        // Var(s^2) ~ (mu4 - sigma^4)/n = (24 - 4) b^4 / n.
        let se = (20.0 * b.powi(4) / n).sqrt();
        assert!(within_sigmas(variance(&xs), 2.0 * b * b, se, 3.0), "b={b}: var {}", variance(&xs));
    }
    assert!(laplace_sample(0.0, &mut RngStream::from_seed(0)).is_err());
}

#[test]
fn noisy_degree_moments() {
    for (i, (d, eps1)) in [(10usize, 0.5), (0, 1.0), (250, 2.0)].into_iter().enumerate() {
        let mut rng = RngStream::new(14, i as u64);
        let xs: Vec<f64> = (0..DRAWS).map(|_| noisy_degree(d, eps1, &mut rng).unwrap()).collect();
        let b = 2.0 / eps1;
        let n = DRAWS as f64;
        assert!(within_sigmas(mean(&xs), d as f64, (2.0f64).sqrt() * b / n.sqrt(), 3.0));
        let se = (20.0 * b.powi(4) / n).sqrt();
        assert!(within_sigmas(variance(&xs), 2.0 * b * b, se, 3.0));
    }
    assert_eq!(noisy_degree(7, f64::INFINITY, &mut RngStream::from_seed(0)).unwrap(), 7.0);
}

#[test]
fn budget_accounting_is_exact() {
    let grid = [0.05, 0.1, 0.4, 0.8, 1.0, 2.5, 8.0];
    for &eps1 in &grid {
        for &eps2 in &grid {
            let params = PrivacyParams::graph(eps1, Some(eps2));
            assert_eq!(total_budget(Protocol::GraphAgg, &params).unwrap(), 2.0 * (eps1 + eps2));
            assert_eq!(total_budget(Protocol::NeighAggWithDegreeRound, &params).unwrap(), 2.0 * (eps1 + eps2));
        }
        let params = PrivacyParams { eps: Some(eps1), ..PrivacyParams::default() };
        assert_eq!(total_budget(Protocol::NeighAgg, &params).unwrap(), 2.0 * eps1);
    }
    assert!(total_budget(Protocol::GraphAgg, &PrivacyParams::graph(1.0, None)).is_err());
}
