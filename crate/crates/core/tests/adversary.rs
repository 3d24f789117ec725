use arbrec::arrivals::bidirected_path_adversary;
use arbrec::engine::run_sequence;
use arbrec::verify::{InvariantChecker, VerifyLevel};

#[test]
fn recourse_on_bidirected_path_is_quadratic() {
    for n in (4..=60).step_by(2).chain([100, 200]) {
        let seq = bidirected_path_adversary(n).unwrap();
        let mut checker = InvariantChecker::new(n, VerifyLevel::Full);
        let (trace, engine) = run_sequence(n, &seq.entries, &mut [&mut checker]).unwrap();
        assert_eq!(trace.total_recourse(), ((n - 2) * (n - 1) / 2) as u64, "n = {n}");
        assert_eq!(engine.forest().size(), n - 1);
        assert!(trace.phases().is_none());
    }
}

#[test]
fn every_second_extension_flips_the_path() {
    let n = 10;
    let seq = bidirected_path_adversary(n).unwrap();
    let (trace, _) = run_sequence(n, &seq.entries, &mut []).unwrap();
    let deletions: Vec<usize> = trace.records.iter().map(|r| r.deletions).collect();
    assert_eq!(deletions, vec![0, 0, 1, 0, 2, 0, 3, 0, 4, 0, 5, 0, 6, 0, 7, 0, 8, 0]);
}
