fn main() {
    orbita::cli::init_logging();
    std::process::exit(orbita::cli::main_with_args(std::env::args_os()));
}
