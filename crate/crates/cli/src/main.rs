use std::process::ExitCode;

fn main() -> ExitCode {
    eigenrank_cli::cli_main()
}
