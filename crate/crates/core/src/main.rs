fn main() {
    std::process::exit(frobenius::cli::run_from_args(std::env::args_os()));
}
