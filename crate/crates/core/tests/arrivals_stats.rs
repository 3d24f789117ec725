use arbrec::arrivals::{uniform_random_sequence, UniformArrivals};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

fn chi_squared_p(observed: &[f64], expected: &[f64]) -> f64 {
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn first_arc_is_uniform_over_pairs() {
    const SEEDS: u64 = 100_000;
    let n = 4;
    let mut counts = vec![0f64; n * n];
    for seed in 0..SEEDS {
        let seq = uniform_random_sequence(n, 1, seed).unwrap();
        let (t, h) = seq.arcs()[0];
        counts[t * n + h] += 1.0;
    }
    let observed: Vec<f64> = (0..n * n).filter(|i| i / n != i % n).map(|i| counts[i]).collect();
    assert_eq!(observed.len(), 12);
    let expected = vec![SEEDS as f64 / 12.0; 12];
    let p = chi_squared_p(&observed, &expected);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn arcs_below_p_form_binomial_random_digraph() {
    const SEEDS: u64 = 20_000;
    let (n, p) = (5usize, 0.3);
    let pairs = n * (n - 1);
    let mut per_pair = vec![0f64; n * n];
    let mut sizes = vec![0f64; pairs + 1];
    for seed in 0..SEEDS {
        let mut k = 0;
        for e in UniformArrivals::new(n, seed) {
            if e.rho.unwrap() > p {
                break;
            }
            per_pair[e.tail * n + e.head] += 1.0;
            k += 1;
        }
        sizes[k] += 1.0;
    }
    // Each pair appears with probability p; five standard deviations.
    let sd = (p * (1.0 - p) / SEEDS as f64).sqrt();
    for (i, c) in per_pair.iter().enumerate() {
        if i / n != i % n {
            let freq = c / SEEDS as f64;
            assert!((freq - p).abs() < 5.0 * sd, "pair {i}: {freq}");
        }
    }
    // Arc count is Binomial(n(n-1), p); pool sparse tails before testing.
    let bin = Binomial::new(p, pairs as u64).unwrap();
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (k, &count) in sizes.iter().enumerate().take(pairs + 1) {
        o_acc += count;
        e_acc += bin.pmf(k as u64) * SEEDS as f64;
        if e_acc >= 20.0 {
            obs.push(o_acc);
            exp.push(e_acc);
            (o_acc, e_acc) = (0.0, 0.0);
        }
    }
    *obs.last_mut().unwrap() += o_acc;
    *exp.last_mut().unwrap() += e_acc;
    let pval = chi_squared_p(&obs, &exp);
    assert!(pval > 0.001, "p = {pval}");
}
