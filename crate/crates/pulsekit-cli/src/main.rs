fn main() {
    println!("pulsekit");
}
