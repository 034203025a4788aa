public class Status {
    Student student;
    int result;

    public Status(java.io.DataInputStream in) throws java.io.IOException {
        this.student = new Student(in);
    }

    public int calculate() {
        this.result = encode(this.student.data);
        return this.result;
    }

    int encode(int value) {
        return value * 31 + 7;
    }

    public int findResult() {
        return this.result;
    }
}
