// Sup norms of Rudin–Shapiro polynomials against `sqrt(N)`, and `L^p`
// norms of the de la Vallée-Poussin star polynomials against `N^{1/q}`.

use tsl::means::{poly_norm, Exponent};
use tsl::polybank::{rudin_shapiro, vdlp_star};

pub fn run() -> tsl::Result<()> {
    println!("{:>6} {:>10} {:>10}", "N", "sup", "sup/sqrtN");
    for e in 2..=12 {
        let n = 1usize << e;
        let p = rudin_shapiro(n)?;
        let sup = poly_norm(&p.to_series(), Exponent::Infinity)?;
        println!("{n:>6} {sup:>10.4} {:>10.4}", sup / (n as f64).sqrt());
    }

    println!();
    println!("{:>6} {:>5} {:>10} {:>10}", "N", "p", "norm", "N^(1/q)");
    for n in [16, 100, 1000] {
        let star = vdlp_star(n)?;
        for p in [1.0, 1.5] {
            let e = Exponent::Finite(p);
            let norm = poly_norm(&star.to_series(), e)?;
            let scale = (n as f64).powf(1.0 / e.conjugate());
            println!("{n:>6} {p:>5} {norm:>10.4} {scale:>10.4}");
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
