fn main() {
    std::process::exit(mm1040_cli::main_with_args(std::env::args_os()));
}
