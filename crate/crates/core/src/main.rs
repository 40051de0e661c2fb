fn main() {
    std::process::exit(macrosig::cli::main_with_args(std::env::args_os()));
}
