fn main() {
    std::process::exit(degsde::cli::run(std::env::args_os()));
}
