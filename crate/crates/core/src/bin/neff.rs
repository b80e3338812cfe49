fn main() {
    std::process::exit(neff::cli::run(std::env::args_os()));
}
