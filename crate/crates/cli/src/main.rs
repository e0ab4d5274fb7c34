fn main() {
    std::process::exit(depsel_cli::main_with_args(std::env::args_os()));
}
