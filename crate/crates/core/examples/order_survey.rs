//! Survey the measured convergence order of every approximation in the
//! crate against its claimed exponent.
//!
//! ```sh
//! cargo run --release --example order_survey
//! ```

use matperturb::*;

fn main() {
    let tol = Tolerances::default();
    let scales = default_scales();
    let seed = 42;

    let problems: Vec<(Problem, usize, usize)> = vec![
        (Problem::Dk { p: 2.0 }, 6, 6),
        (Problem::Dk { p: 3.0 }, 6, 6),
        (Problem::Power { p: 1.5 }, 6, 3),
        (Problem::Power { p: 2.0 }, 6, 3),
        (Problem::Power { p: 2.5 }, 6, 3),
        (Problem::PowerS { s: 1.5 }, 6, 3),
        (Problem::PowerS { s: 2.0 }, 6, 3),
        (Problem::Modulus, 6, 3),
        (Problem::ModulusPsd, 6, 3),
        (Problem::ModulusInvertible, 6, 6),
        (Problem::ProjectorLinearization, 6, 3),
        (Problem::ProjectedKernelPower { p: 2.0 }, 6, 3),
        (Problem::ProjectorCrossTerm, 6, 3),
        (Problem::ProjectorRangeTerm, 6, 3),
    ];

    println!("{:<32} {:>9} {:>10} {:>6}", "problem", "expected", "min slope", "pass");
    for (problem, n, rank) in problems {
        let reports = run_campaign(
            &problem,
            n,
            rank,
            (0.5, 2.0),
            10,
            seed,
            &scales,
            DEFAULT_SLOPE_MARGIN,
            &tol,
        )
        .expect("campaign");
        let min_slope = reports
            .iter()
            .map(|r| r.fitted_slope)
            .fold(f64::INFINITY, f64::min);
        let pass = reports.iter().all(|r| r.pass);
        let expected = match problem.expected_order() {
            ExpectedOrder::Known(r) => format!("{r:.3}"),
            ExpectedOrder::Unguaranteed => "none".to_string(),
        };
        println!(
            "{:<32} {:>9} {:>10.4} {:>6}",
            problem.name(),
            expected,
            min_slope,
            pass
        );
    }
}
