use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use blab::cli::{run_config_file, EXIT_FAIL};
use blab::domains::{make_domain, Domain};
use blab::infogeo::{calibrate_convention, gaussian_fisher, gaussian_line_rule, ScoreMethod, CONVENTION_CONSTANT};
use blab::maps::{make_map, MapSpec};
use blab::numerics::build_quadrature;

#[derive(Parser)]
#[command(name = "blab", version, about = "Bergman kernels, Fisher metrics and proper-map experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// List the supported domains.
    ListDomains,
    /// List the registered example maps.
    ListMaps,
    /// Run the Gaussian and disk calibrations and print the convention constant.
    Calibrate {
        /// Quadrature resolution for the disk calibration.
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
}

const DOMAINS: [(&str, &str); 5] = [
    ("disk", "unit disk"),
    ("annulus:r=<r>", "r < |z| < 1, 0 < r < 1"),
    ("polydisk", "unit bidisk in C^2"),
    ("ball2", "unit ball in C^2"),
    ("ellipse:a=<a>,b=<b>", "(x/a)^2 + (y/b)^2 < 1, a, b > 0"),
];

fn configure_threads() {
    let Ok(raw) = std::env::var("BLAB_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the worker pool: {e}");
            }
        }
        _ => log::warn!("ignoring BLAB_THREADS={raw:?}; expected a positive integer"),
    }
}

fn list_maps() -> blab::error::Result<()> {
    for spec in MapSpec::registry() {
        let f = make_map(&spec)?;
        println!(
            "{spec}: {} -> {}, {} sheet(s), {}",
            f.source().spec(),
            f.target().spec(),
            f.sheet_count(),
            if f.is_injective() { "injective" } else { "not injective" }
        );
    }
    Ok(())
}

fn calibrate(resolution: usize) -> blab::error::Result<()> {
    let (mu, sigma) = (0.0, 1.0);
    let g = gaussian_fisher(mu, sigma, &gaussian_line_rule(mu, sigma, 64))?;
    println!(
        "gaussian N({mu}, {sigma}^2): I = [[{:.6}, {:.2e}], [{:.2e}, {:.6}]] (exact diag(1, 2))",
        g[(0, 0)],
        g[(0, 1)],
        g[(1, 0)],
        g[(1, 1)]
    );
    let disk: Domain = make_domain(blab::domains::DomainSpec::UnitDisk)?;
    let rule = build_quadrature(&disk, resolution)?;
    for method in [ScoreMethod::default(), ScoreMethod::Analytic] {
        let c = calibrate_convention(&rule, &method)?;
        println!("disk z = 0, scores {method}: Fisher / Bergman = {c:.8}");
    }
    println!("convention constant: {CONVENTION_CONSTANT}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => run_config_file(&config),
        Command::ListDomains => {
            for (grammar, description) in DOMAINS {
                println!("{grammar:<22} {description}");
            }
            0
        }
        Command::ListMaps => match list_maps() {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("blab: {e}");
                EXIT_FAIL
            }
        },
        Command::Calibrate { resolution } => match calibrate(resolution) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("blab: {e}");
                EXIT_FAIL
            }
        },
    };
    ExitCode::from(code as u8)
}
