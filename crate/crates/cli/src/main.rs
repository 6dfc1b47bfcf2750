fn main() {
    std::process::exit(causalkit_cli::main_with_args(std::env::args_os()));
}
