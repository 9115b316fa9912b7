fn main() {
    std::process::exit(twistqft::cli::main_with_args(std::env::args_os()));
}
