fn main() {
    std::process::exit(blaschke_cli::main_with_args(std::env::args_os()));
}
