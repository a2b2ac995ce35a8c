fn main() {
    std::process::exit(quietzone_cli::commands::main_with_args(std::env::args_os()));
}
