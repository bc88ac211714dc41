fn main() {
    std::process::exit(specsense::cli::main());
}
