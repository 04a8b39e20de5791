fn main() {
    std::process::exit(aad_cli::run_cli(std::env::args_os()));
}
