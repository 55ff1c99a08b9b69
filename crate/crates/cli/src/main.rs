use std::io;

fn main() {
    let env_seed = std::env::var(qnpr_cli::SEED_ENV).ok();
    let code = qnpr_cli::run(
        std::env::args_os(),
        env_seed.as_deref(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
