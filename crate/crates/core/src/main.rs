fn main() {
    std::process::exit(varband::cli::run(std::env::args_os()));
}
