fn main() {
    std::process::exit(cothp::experiments::cli::run_cli(std::env::args_os()));
}
