fn main() {
    std::process::exit(kstar::cli::run(std::env::args_os()));
}
