import java.io.DataInputStream;
import java.io.IOException;

public class Recur {
    int bounce(int x) {
        return echo(x);
    }

    int echo(int x) {
        return bounce(x);
    }

    int go(DataInputStream in) throws IOException {
        byte[] buf = new byte[4];
        in.read(buf);
        return bounce(buf[0]);
    }
}
