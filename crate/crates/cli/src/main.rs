use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) =
        learnt_ivf_cli::configure_threads().and_then(|_| learnt_ivf_cli::run(std::env::args_os()))
    {
        eprintln!("error: {e}");
        return ExitCode::from(e.code as u8);
    }
    ExitCode::SUCCESS
}
