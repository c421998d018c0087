fn main() {
    std::process::exit(liebrane::cli::run(std::env::args_os()));
}
