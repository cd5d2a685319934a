fn main() {
    std::process::exit(ehra::cli::main_with_args(std::env::args_os()));
}
