fn main() -> std::process::ExitCode {
    ensemble_info_cli::run(std::env::args_os())
}
