fn main() -> std::process::ExitCode {
    perimkit_cli::app::run(std::env::args_os())
}
