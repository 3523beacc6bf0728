fn main() {
    std::process::exit(ridge_sketch::cli::run_cli(std::env::args_os()));
}
