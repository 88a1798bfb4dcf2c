fn main() {
    std::process::exit(kbf_core::cli::run_cli(std::env::args_os()));
}
