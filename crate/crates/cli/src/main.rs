fn main() {
    std::process::exit(carousel_cli::run(std::env::args_os()));
}
