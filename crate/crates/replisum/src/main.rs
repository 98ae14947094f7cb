fn main() {
    std::process::exit(replisum::cli::run(std::env::args_os()));
}
