use clap::{Parser, Subcommand};
use matperturb_cli::{
    cmd_approx, cmd_order, cmd_wihler, ApproxArgs, CliError, OrderArgs, WihlerArgs,
    EXIT_ORDER_FAILED,
};

/// First-order perturbation approximations of matrix powers and the
/// matrix modulus, with empirical order verification.
#[derive(Parser)]
#[command(name = "matperturb", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one approximation on matrices from files and report the
    /// error against the exact value.
    Approx(ApproxArgs),
    /// Run a seeded convergence-order campaign and assert the claimed
    /// exponent.
    Order(OrderArgs),
    /// Sweep random PSD pairs against the Hölder bound for fractional
    /// powers.
    Wihler(WihlerArgs),
}

fn emit_error(message: &str, exit_code: i32) -> ! {
    // one line, machine-parseable
    let payload = serde_json::json!({ "error": message, "exit_code": exit_code });
    eprintln!("{payload}");
    std::process::exit(exit_code);
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            emit_error(&e.to_string().replace('\n', " "), 1);
        }
    };

    let (result, out) = match &cli.command {
        Command::Approx(args) => (cmd_approx(args), args.out.clone()),
        Command::Order(args) => (cmd_order(args), args.out.clone()),
        Command::Wihler(args) => (cmd_wihler(args), args.out.clone()),
    };

    let report = match result {
        Ok(report) => report,
        Err(e) => emit_error(e.message(), e.exit_code()),
    };

    if let Err(e) = report.write(out.as_deref()) {
        emit_error(CliError::from(e).message(), 1);
    }
    if !report.summary.pass {
        std::process::exit(EXIT_ORDER_FAILED);
    }
}
