fn main() {
    std::process::exit(sosverify::cli::main_with_args(std::env::args_os()));
}
