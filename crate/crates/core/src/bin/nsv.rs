fn main() {
    std::process::exit(nsv_core::cli::run_from(std::env::args_os()));
}
