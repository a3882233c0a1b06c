fn main() {
    std::process::exit(qmaxent::cli::run());
}
