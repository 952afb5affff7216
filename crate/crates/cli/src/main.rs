fn main() {
    std::process::exit(fpo::run(std::env::args_os()));
}
