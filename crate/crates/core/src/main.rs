fn main() {
    std::process::exit(casimir::cli::run(std::env::args_os(), std::env::vars()));
}
