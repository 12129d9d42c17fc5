use ncmart::constants::{
    adversarial_search, adversarial_search_seeded, ratio, InequalityKind, RatioInput, Witness,
};
use ncmart::filtration::FiltrationKind;
use ncmart::par::{map_indices, Execution};
use ncmart::solver::{gaussian_matrix, rng_from_seed, split_seed, SolverOptions};
use ncmart::Exponent;

/// Best BG_LOWER ratio over `draws` independent complex Gaussian 4x4 inputs.
fn sampled_bg_lower(draws: usize) -> f64 {
    let chunks = 64;
    let per = draws / chunks;
    map_indices(Execution::Parallel, chunks, |c| {
        let mut rng = rng_from_seed(split_seed(77, c as u64));
        (0..per)
            .map(|_| {
                let input = RatioInput::Martingale {
                    terminal: gaussian_matrix(&mut rng, 4, 4),
                    filtration: FiltrationKind::Augmented,
                    row_part: None,
                };
                ratio(InequalityKind::BgLower, &input, Exponent::INFINITY).unwrap()
            })
            .fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

#[test]
fn bg_lower_search_beats_a_million_samples() {
    let sampled = sampled_bg_lower(1_000_000);
    let est = adversarial_search(
        InequalityKind::BgLower,
        4,
        Exponent::INFINITY,
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(
        est.lower_bound >= sampled,
        "search {} < sampled {sampled}",
        est.lower_bound
    );
    assert!(est.replay_error().unwrap() <= 1e-8);
}

#[test]
fn stein_bounds_grow_along_embedded_witnesses() {
    let opts = SolverOptions::default()
        .with_restarts(1)
        .with_max_iterations(12);
    let mut seeds: Vec<RatioInput> = Vec::new();
    let mut last = 0.0;
    for n in [8, 16, 32, 64] {
        let est = adversarial_search_seeded(
            InequalityKind::Stein,
            n,
            Exponent::INFINITY,
            &opts,
            &seeds,
            Execution::Parallel,
        )
        .unwrap();
        assert!(
            est.lower_bound >= last,
            "n={n}: {} < {last}",
            est.lower_bound
        );
        last = est.lower_bound;
        let Witness::Ratio(input) = est.witness else {
            unreachable!()
        };
        seeds = vec![input];
    }
}
