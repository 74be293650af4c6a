fn main() {
    std::process::exit(lvanish::cli::run(std::env::args_os()));
}
