fn main() {
    std::process::exit(sensedict::cli::run(std::env::args_os()).code());
}
