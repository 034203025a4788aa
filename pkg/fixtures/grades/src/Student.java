import java.io.DataInputStream;
import java.io.IOException;

public class Student {
    int data;

    public Student(DataInputStream in) throws IOException {
        byte[] buf = new byte[8];
        in.read(buf);
        this.data = buf[0];
    }
}
