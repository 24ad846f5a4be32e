// Seeded randomized suites for the power-sum and Abel inequalities, and the
// lacunary series ratio near the boundary.

use tsl::verify::{abel_suite, lacunary_ratios, power_sum_suite, AsymptoticProbe};

pub fn run() -> tsl::Result<()> {
    let seed = 7;
    for report in [power_sum_suite(seed, 200)?, abel_suite(seed, 200)?] {
        println!(
            "{}: {} instances, {} violations, min margin {:.3e}",
            report.name, report.instances, report.violations, report.min_margin
        );
    }
    for (j, ratio) in lacunary_ratios(&AsymptoticProbe::squares(), &[16, 25, 36, 49])? {
        println!("r = 1 - 2^-{j}: ratio {ratio:.4}");
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
