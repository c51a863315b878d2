fn main() {
    std::process::exit(summakit::cli::run(std::env::args_os()));
}
