use std::process::ExitCode;

use branchfinder::cli;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let env_seed = std::env::var(cli::SEED_ENV).ok();
    let mut stdout = std::io::stdout().lock();
    match cli::run(args, env_seed.as_deref(), &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error_kind={} {}", e.kind(), e.to_string().trim_end());
            ExitCode::FAILURE
        }
    }
}
