fn main() {
    std::process::exit(leap_core::cli::run_cli(std::env::args_os()));
}
