// Builds the dyadic Rudin–Shapiro construction, tabulates `M_2(f, r)` and
// fits the growth exponent in `1/(1-r)`.

use tsl::constructor::{construct, ConstructionSpec};
use tsl::means::{critical_exponent, default_radii, fit_growth_exponent, means_table, Exponent};
use tsl::polybank::enumerate_targets;

pub fn run() -> tsl::Result<()> {
    let targets = enumerate_targets(64)?;
    let two = Exponent::Finite(2.0);
    for gamma in [0.0, 0.5] {
        let spec = ConstructionSpec {
            max_degree: 1 << 18,
            ..ConstructionSpec::dyadic_rs(0.0, gamma)?
        };
        let c = construct(&spec, &targets)?;
        let table = means_table(&c.series, &[two], &default_radii(spec.max_degree))?;
        let fit = fit_growth_exponent(&table, two)?;
        println!(
            "gamma {gamma}: {} blocks, slope {:.3} (predicted {:.3}), residual {:.3}",
            c.ledger.built().count(),
            fit.slope,
            critical_exponent(two, gamma)?,
            fit.residual_rms
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
