import java.io.DataInputStream;
import java.io.IOException;

public class Main {
    public static void main(String[] args) throws IOException {
        DataInputStream in = new DataInputStream(System.in);
        Status s = new Status(in);
        s.calculate();
        System.out.print(s.findResult());
    }
}
