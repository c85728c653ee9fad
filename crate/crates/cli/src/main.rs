fn main() {
    std::process::exit(isosceles_cli::run(std::env::args_os()));
}
