fn main() {
    std::process::exit(bicarleson::cli::run(std::env::args_os()));
}
